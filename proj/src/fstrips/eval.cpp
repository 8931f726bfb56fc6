#include "ctmp/fstrips/eval.hpp"

#include <array>

namespace ctmp::fs {

namespace {

constexpr std::size_t kInlineArity = 8;

template <class F>
Value with_args(const Problem& problem, const State& state, const Term& term, F&& f)
{
    const std::size_t n = term.args.size();
    if (n <= kInlineArity) {
        std::array<Value, kInlineArity> buf{};
        for (std::size_t i = 0; i < n; ++i)
            buf[i] = eval_term(problem, state, term.args[i]);
        return f(std::span<const Value>(buf.data(), n));
    }
    std::vector<Value> buf(n);
    for (std::size_t i = 0; i < n; ++i)
        buf[i] = eval_term(problem, state, term.args[i]);
    return f(std::span<const Value>(buf));
}

Value apply_symbol(const Problem& problem, const State& state, const Term& term)
{
    const FunctionSymbol& sym = problem.signature.symbol(term.index);
    return with_args(problem, state, term, [&](std::span<const Value> args) -> Value {
        switch (sym.kind) {
        case SymbolKind::Fluent: {
            auto var = problem.var_index(term.index, args);
            if (!var)
                throw EvalError("argument of '" + sym.name + "' outside its type");
            return state[static_cast<std::size_t>(*var)];
        }
        case SymbolKind::FixedTable: {
            auto it = sym.table.find(table_key(args));
            if (it != sym.table.end())
                return it->second;
            if (sym.closed_world)
                return 0;
            throw EvalError("fixed symbol '" + sym.name + "' has no table entry for these arguments");
        }
        case SymbolKind::Procedure:
            if (!sym.procedure)
                throw EvalError("procedure '" + sym.name + "' is not registered");
            return (*sym.procedure)(args);
        }
        return 0;
    });
}

struct Write {
    std::size_t var;
    Value value;
};

}  // namespace

std::string table_key(std::span<const Value> args)
{
    std::string key(args.size() * sizeof(Value), '\0');
    for (std::size_t i = 0; i < args.size(); ++i) {
        auto u = static_cast<std::uint32_t>(args[i]);
        for (std::size_t b = 0; b < 4; ++b)
            key[i * 4 + b] = static_cast<char>((u >> (8 * b)) & 0xffu);
    }
    return key;
}

Value eval_term(const Problem& problem, const State& state, const Term& term)
{
    switch (term.kind) {
    case TermKind::Constant: return term.index;
    case TermKind::StateVar: return state[static_cast<std::size_t>(term.index)];
    case TermKind::Apply: return apply_symbol(problem, state, term);
    case TermKind::Add:
        return eval_term(problem, state, term.args[0]) + eval_term(problem, state, term.args[1]);
    case TermKind::Sub:
        return eval_term(problem, state, term.args[0]) - eval_term(problem, state, term.args[1]);
    case TermKind::Param: throw EvalError("unbound parameter in term");
    }
    return 0;
}

bool eval_formula(const Problem& problem, const State& state, const Formula& f)
{
    switch (f.kind) {
    case FormulaKind::True: return true;
    case FormulaKind::False: return false;
    case FormulaKind::Eq:
        return eval_term(problem, state, f.terms[0]) == eval_term(problem, state, f.terms[1]);
    case FormulaKind::Neq:
        return eval_term(problem, state, f.terms[0]) != eval_term(problem, state, f.terms[1]);
    case FormulaKind::Atom: return eval_term(problem, state, f.terms[0]) != 0;
    case FormulaKind::Not: return !eval_formula(problem, state, f.children[0]);
    case FormulaKind::And:
        for (const auto& c : f.children)
            if (!eval_formula(problem, state, c))
                return false;
        return true;
    case FormulaKind::Or:
        for (const auto& c : f.children)
            if (eval_formula(problem, state, c))
                return true;
        return false;
    }
    return false;
}

State apply_effects(const Problem& problem, const State& state, const GroundAction& action)
{
    std::array<Write, 16> inline_writes{};
    std::vector<Write> heap_writes;
    const bool small = action.effects.size() <= inline_writes.size();
    if (!small)
        heap_writes.resize(action.effects.size());
    auto writes = small ? std::span<Write>(inline_writes.data(), action.effects.size()) : std::span<Write>(heap_writes);

    for (std::size_t i = 0; i < action.effects.size(); ++i) {
        const Effect& e = action.effects[i];
        std::optional<int> var = e.var >= 0 ? std::optional<int>(e.var) : std::nullopt;
        if (!var) {
            std::array<Value, kInlineArity> args{};
            if (e.args.size() > kInlineArity)
                throw EvalError("effect arity exceeds " + std::to_string(kInlineArity));
            for (std::size_t a = 0; a < e.args.size(); ++a)
                args[a] = eval_term(problem, state, e.args[a]);
            var = problem.var_index(e.fluent, std::span<const Value>(args.data(), e.args.size()));
        }
        if (!var)
            throw EvalError("effect on '" + problem.signature.symbol(e.fluent).name +
                            "' addresses an argument outside its type");
        Value v = eval_term(problem, state, e.rhs);
        if (!problem.signature.type(problem.var_type(*var)).position(v))
            throw EvalError("effect of " + action.name + " assigns " + problem.var_name(*var) +
                            " a value outside its type");
        writes[i] = Write{static_cast<std::size_t>(*var), v};
    }
    for (std::size_t i = 0; i < writes.size(); ++i)
        for (std::size_t j = i + 1; j < writes.size(); ++j)
            if (writes[i].var == writes[j].var && writes[i].value != writes[j].value)
                throw ModelError("action " + action.name + " writes two values to " +
                                 problem.var_name(static_cast<int>(writes[i].var)));

    State next = state;
    for (const Write& w : writes)
        next.set(w.var, w.value);
    return next;
}

std::optional<State> try_apply(const Problem& problem, const State& state, const GroundAction& action,
                               std::span<const Formula> constraints)
{
    if (!eval_formula(problem, state, action.precondition))
        return std::nullopt;
    State next = apply_effects(problem, state, action);
    for (const Formula& c : constraints)
        if (!eval_formula(problem, next, c))
            return std::nullopt;
    return next;
}

bool is_applicable(const Problem& problem, const State& state, const GroundAction& action,
                   std::span<const Formula> constraints)
{
    return try_apply(problem, state, action, constraints).has_value();
}

}  // namespace ctmp::fs
