#pragma once

// Data model for Functional STRIPS problems with state constraints and
// externally defined procedures.

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace ctmp::fs {

/// Denotation of a constant. Symbolic constants are global ids into the
/// problem's constant table, integers are stored as themselves and Booleans
/// as 0/1. The type of the surrounding term decides the reading.
using Value = std::int32_t;

class ModelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class EvalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class TypeKind : std::uint8_t { Symbolic, IntRange, Bool };

struct TypeDef {
    std::string name;
    TypeKind kind = TypeKind::Symbolic;
    std::vector<Value> members;  // Symbolic: global constant ids in declaration order
    Value lo = 0;                // IntRange bounds, inclusive
    Value hi = -1;

    std::size_t size() const;
    std::optional<int> position(Value v) const;
    Value member(std::size_t pos) const;

private:
    friend class Signature;
    std::unordered_map<Value, int> pos_;
};

enum class SymbolKind : std::uint8_t { Fluent, FixedTable, Procedure };

using Procedure = std::function<Value(std::span<const Value>)>;

struct FunctionSymbol {
    std::string name;
    SymbolKind kind = SymbolKind::Fluent;
    std::vector<int> arg_types;
    int value_type = -1;

    // Fluent: state variables occupy [first_var, first_var + product of arg sizes).
    int first_var = -1;
    std::vector<int> strides;

    // FixedTable: extensional denotation keyed by the argument tuple.
    std::unordered_map<std::string, Value> table;
    bool closed_world = false;  // Boolean tables: missing tuples denote false

    // Procedure: resolved at Problem::finalize.
    const Procedure* procedure = nullptr;
};

class Signature {
public:
    int bool_type() const { return bool_type_; }

    int add_type(std::string name, std::vector<std::string> member_names);
    int add_int_type(std::string name, Value lo, Value hi);
    int add_symbol(FunctionSymbol sym);

    Value intern_constant(const std::string& name);
    std::optional<Value> find_constant(const std::string& name) const;
    const std::string& constant_name(Value id) const { return constant_names_.at(static_cast<std::size_t>(id)); }
    std::size_t constant_count() const { return constant_names_.size(); }

    std::optional<int> find_type(const std::string& name) const;
    std::optional<int> find_symbol(const std::string& name) const;

    const TypeDef& type(int id) const { return types_.at(static_cast<std::size_t>(id)); }
    const FunctionSymbol& symbol(int id) const { return symbols_.at(static_cast<std::size_t>(id)); }
    FunctionSymbol& symbol_mut(int id) { return symbols_.at(static_cast<std::size_t>(id)); }
    std::size_t type_count() const { return types_.size(); }
    std::size_t symbol_count() const { return symbols_.size(); }

    /// Human-readable rendering of a value of the given type.
    std::string render(int type, Value v) const;

    Signature();

private:
    std::vector<TypeDef> types_;
    std::vector<FunctionSymbol> symbols_;
    std::vector<std::string> constant_names_;
    std::unordered_map<std::string, Value> constant_ids_;
    std::unordered_map<std::string, int> type_ids_;
    std::unordered_map<std::string, int> symbol_ids_;
    int bool_type_ = -1;
};

enum class TermKind : std::uint8_t {
    Constant,  // index = value
    Param,     // index = parameter position (schemas only)
    StateVar,  // index = state variable, a fluent applied to constants
    Apply,     // index = symbol id, args evaluated first
    Add,
    Sub,
};

struct Term {
    TermKind kind = TermKind::Constant;
    std::int32_t index = 0;
    int type = -1;
    std::vector<Term> args;

    static Term constant(Value v, int type) { return Term{TermKind::Constant, v, type, {}}; }
    static Term state_var(int var, int type) { return Term{TermKind::StateVar, var, type, {}}; }
    static Term param(int pos, int type) { return Term{TermKind::Param, pos, type, {}}; }
    static Term apply(int symbol, int type, std::vector<Term> args)
    {
        return Term{TermKind::Apply, symbol, type, std::move(args)};
    }
};

enum class FormulaKind : std::uint8_t { True, False, Eq, Neq, Atom, Not, And, Or };

struct Formula {
    FormulaKind kind = FormulaKind::True;
    std::vector<Term> terms;        // Eq/Neq: two terms; Atom: one Boolean term
    std::vector<Formula> children;  // Not: one; And/Or: any

    static Formula truth(bool b) { return Formula{b ? FormulaKind::True : FormulaKind::False, {}, {}}; }
    static Formula eq(Term a, Term b) { return Formula{FormulaKind::Eq, {std::move(a), std::move(b)}, {}}; }
    static Formula conj(std::vector<Formula> cs) { return Formula{FormulaKind::And, {}, std::move(cs)}; }
};

/// Top-level conjuncts of a formula (the formula itself when not a conjunction).
std::vector<Formula> conjuncts(const Formula& f);

struct Effect {
    int fluent = -1;
    std::vector<Term> args;  // lhs arguments; the lhs head is always a fluent
    Term rhs;
    int var = -1;  // resolved state variable when every argument is a constant
};

struct Parameter {
    std::string name;
    int type = -1;
};

struct ActionSchema {
    std::string name;
    std::vector<Parameter> params;
    Formula precondition;
    std::vector<Effect> effects;
};

struct ConstraintSchema {
    std::vector<Parameter> params;
    Formula body;
};

struct StateVariable {
    int fluent = -1;
    std::vector<Value> args;
};

class State {
public:
    State() = default;
    explicit State(std::vector<Value> values) : values_(std::move(values)) {}

    Value operator[](std::size_t var) const { return values_[var]; }
    void set(std::size_t var, Value v) { values_[var] = v; }
    std::size_t size() const { return values_.size(); }
    std::span<const Value> values() const { return values_; }

    /// Canonical little-endian byte string in variable order; the identity
    /// used for duplicate detection.
    std::string encode() const;

    friend bool operator==(const State&, const State&) = default;

private:
    std::vector<Value> values_;
};

struct StateHash {
    std::size_t operator()(const State& s) const noexcept;
};

class ProcedureRegistry {
public:
    void bind(const std::string& name, Procedure proc);
    const Procedure* find(const std::string& name) const;
    bool contains(const std::string& name) const { return find(name) != nullptr; }

private:
    std::unordered_map<std::string, std::unique_ptr<Procedure>> procs_;
};

/// A Functional STRIPS problem with state constraints, <S, I, O, G, C, F>.
class Problem {
public:
    std::string name;
    Signature signature;
    std::vector<ActionSchema> actions;
    std::vector<ConstraintSchema> constraints;
    Formula goal;
    std::shared_ptr<const ProcedureRegistry> procedures;

    /// Lays out state variables, resolves procedures and checks the initial
    /// assignment for totality. Must be called once, after all symbols exist.
    void finalize(const std::vector<std::pair<StateVariable, Value>>& init);

    const std::vector<StateVariable>& variables() const { return variables_; }
    const State& initial_state() const { return initial_; }

    /// Index of f(args), or nullopt if an argument lies outside its type.
    std::optional<int> var_index(int fluent, std::span<const Value> args) const;
    int var_type(int var) const;
    std::string var_name(int var) const;

private:
    std::vector<StateVariable> variables_;
    std::vector<int> var_types_;
    State initial_;
};

}  // namespace ctmp::fs
