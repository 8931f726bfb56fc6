#include "ctmp/fstrips/model.hpp"

#include <cstring>

namespace ctmp::fs {

std::size_t TypeDef::size() const
{
    switch (kind) {
    case TypeKind::Symbolic: return members.size();
    case TypeKind::IntRange: return hi >= lo ? static_cast<std::size_t>(hi - lo + 1) : 0;
    case TypeKind::Bool: return 2;
    }
    return 0;
}

std::optional<int> TypeDef::position(Value v) const
{
    switch (kind) {
    case TypeKind::Symbolic: {
        auto it = pos_.find(v);
        if (it == pos_.end())
            return std::nullopt;
        return it->second;
    }
    case TypeKind::IntRange:
        if (v < lo || v > hi)
            return std::nullopt;
        return v - lo;
    case TypeKind::Bool:
        if (v != 0 && v != 1)
            return std::nullopt;
        return v;
    }
    return std::nullopt;
}

Value TypeDef::member(std::size_t pos) const
{
    switch (kind) {
    case TypeKind::Symbolic: return members.at(pos);
    case TypeKind::IntRange: return lo + static_cast<Value>(pos);
    case TypeKind::Bool: return static_cast<Value>(pos);
    }
    return 0;
}

Signature::Signature()
{
    TypeDef b;
    b.name = "bool";
    b.kind = TypeKind::Bool;
    bool_type_ = 0;
    types_.push_back(std::move(b));
    type_ids_.emplace("bool", 0);
}

Value Signature::intern_constant(const std::string& name)
{
    auto [it, inserted] = constant_ids_.try_emplace(name, static_cast<Value>(constant_names_.size()));
    if (inserted)
        constant_names_.push_back(name);
    return it->second;
}

std::optional<Value> Signature::find_constant(const std::string& name) const
{
    auto it = constant_ids_.find(name);
    if (it == constant_ids_.end())
        return std::nullopt;
    return it->second;
}

int Signature::add_type(std::string name, std::vector<std::string> member_names)
{
    if (type_ids_.contains(name))
        throw ModelError("duplicate type '" + name + "'");
    if (member_names.empty())
        throw ModelError("type '" + name + "' has no members");
    TypeDef t;
    t.name = name;
    t.kind = TypeKind::Symbolic;
    for (const auto& m : member_names) {
        Value id = intern_constant(m);
        if (!t.pos_.emplace(id, static_cast<int>(t.members.size())).second)
            throw ModelError("duplicate member '" + m + "' in type '" + name + "'");
        t.members.push_back(id);
    }
    int id = static_cast<int>(types_.size());
    types_.push_back(std::move(t));
    type_ids_.emplace(std::move(name), id);
    return id;
}

int Signature::add_int_type(std::string name, Value lo, Value hi)
{
    if (type_ids_.contains(name))
        throw ModelError("duplicate type '" + name + "'");
    if (hi < lo)
        throw ModelError("type '" + name + "' has an empty range");
    TypeDef t;
    t.name = name;
    t.kind = TypeKind::IntRange;
    t.lo = lo;
    t.hi = hi;
    int id = static_cast<int>(types_.size());
    types_.push_back(std::move(t));
    type_ids_.emplace(std::move(name), id);
    return id;
}

int Signature::add_symbol(FunctionSymbol sym)
{
    if (symbol_ids_.contains(sym.name))
        throw ModelError("duplicate symbol '" + sym.name + "'");
    const bool is_proc = !sym.name.empty() && sym.name.front() == '@';
    if (is_proc != (sym.kind == SymbolKind::Procedure))
        throw ModelError("symbol '" + sym.name + "': procedures, and only procedures, carry the '@' prefix");
    int id = static_cast<int>(symbols_.size());
    symbol_ids_.emplace(sym.name, id);
    symbols_.push_back(std::move(sym));
    return id;
}

std::optional<int> Signature::find_type(const std::string& name) const
{
    auto it = type_ids_.find(name);
    if (it == type_ids_.end())
        return std::nullopt;
    return it->second;
}

std::optional<int> Signature::find_symbol(const std::string& name) const
{
    auto it = symbol_ids_.find(name);
    if (it == symbol_ids_.end())
        return std::nullopt;
    return it->second;
}

std::string Signature::render(int type, Value v) const
{
    const TypeDef& t = this->type(type);
    switch (t.kind) {
    case TypeKind::Bool: return v ? "true" : "false";
    case TypeKind::IntRange: return std::to_string(v);
    case TypeKind::Symbolic:
        if (v >= 0 && static_cast<std::size_t>(v) < constant_names_.size())
            return constant_names_[static_cast<std::size_t>(v)];
        return "#" + std::to_string(v);
    }
    return {};
}

std::vector<Formula> conjuncts(const Formula& f)
{
    if (f.kind != FormulaKind::And)
        return {f};
    std::vector<Formula> out;
    for (const auto& c : f.children) {
        auto sub = conjuncts(c);
        out.insert(out.end(), sub.begin(), sub.end());
    }
    return out;
}

std::string State::encode() const
{
    std::string out(values_.size() * 4, '\0');
    for (std::size_t i = 0; i < values_.size(); ++i) {
        auto u = static_cast<std::uint32_t>(values_[i]);
        for (int b = 0; b < 4; ++b)
            out[i * 4 + static_cast<std::size_t>(b)] = static_cast<char>((u >> (8 * b)) & 0xffu);
    }
    return out;
}

std::size_t StateHash::operator()(const State& s) const noexcept
{
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (Value v : s.values()) {
        h ^= static_cast<std::uint32_t>(v);
        h *= 0x100000001b3ull;
        h ^= h >> 29;
    }
    return static_cast<std::size_t>(h);
}

void ProcedureRegistry::bind(const std::string& name, Procedure proc)
{
    if (name.empty() || name.front() != '@')
        throw ModelError("procedure name '" + name + "' must start with '@'");
    procs_[name] = std::make_unique<Procedure>(std::move(proc));
}

const Procedure* ProcedureRegistry::find(const std::string& name) const
{
    auto it = procs_.find(name);
    return it == procs_.end() ? nullptr : it->second.get();
}

void Problem::finalize(const std::vector<std::pair<StateVariable, Value>>& init)
{
    variables_.clear();
    var_types_.clear();
    for (std::size_t s = 0; s < signature.symbol_count(); ++s) {
        FunctionSymbol& sym = signature.symbol_mut(static_cast<int>(s));
        if (sym.kind == SymbolKind::Procedure) {
            sym.procedure = procedures ? procedures->find(sym.name) : nullptr;
            if (!sym.procedure)
                throw ModelError("procedure '" + sym.name + "' is not registered");
            continue;
        }
        if (sym.kind != SymbolKind::Fluent)
            continue;
        sym.first_var = static_cast<int>(variables_.size());
        sym.strides.assign(sym.arg_types.size(), 1);
        std::size_t count = 1;
        for (std::size_t i = sym.arg_types.size(); i-- > 0;) {
            sym.strides[i] = static_cast<int>(count);
            count *= signature.type(sym.arg_types[i]).size();
        }
        std::vector<std::size_t> pos(sym.arg_types.size(), 0);
        for (std::size_t n = 0; n < count; ++n) {
            StateVariable v;
            v.fluent = static_cast<int>(s);
            for (std::size_t i = 0; i < pos.size(); ++i)
                v.args.push_back(signature.type(sym.arg_types[i]).member(pos[i]));
            variables_.push_back(std::move(v));
            var_types_.push_back(sym.value_type);
            for (std::size_t i = pos.size(); i-- > 0;) {
                if (++pos[i] < signature.type(sym.arg_types[i]).size())
                    break;
                pos[i] = 0;
            }
        }
    }

    std::vector<Value> values(variables_.size(), 0);
    std::vector<bool> assigned(variables_.size(), false);
    for (const auto& [sv, value] : init) {
        auto idx = var_index(sv.fluent, sv.args);
        if (!idx)
            throw ModelError("initial assignment to an undefined state variable of '" +
                             signature.symbol(sv.fluent).name + "'");
        auto i = static_cast<std::size_t>(*idx);
        if (assigned[i] && values[i] != value)
            throw ModelError("conflicting initial values for " + var_name(*idx));
        if (!signature.type(var_types_[i]).position(value))
            throw ModelError("initial value of " + var_name(*idx) + " is outside its type");
        values[i] = value;
        assigned[i] = true;
    }
    for (std::size_t i = 0; i < assigned.size(); ++i)
        if (!assigned[i])
            throw ModelError("state variable " + var_name(static_cast<int>(i)) + " has no initial value");
    initial_ = State(std::move(values));
}

std::optional<int> Problem::var_index(int fluent, std::span<const Value> args) const
{
    const FunctionSymbol& sym = signature.symbol(fluent);
    if (sym.kind != SymbolKind::Fluent || args.size() != sym.arg_types.size())
        return std::nullopt;
    int idx = sym.first_var;
    for (std::size_t i = 0; i < args.size(); ++i) {
        auto p = signature.type(sym.arg_types[i]).position(args[i]);
        if (!p)
            return std::nullopt;
        idx += *p * sym.strides[i];
    }
    return idx;
}

int Problem::var_type(int var) const
{
    return var_types_.at(static_cast<std::size_t>(var));
}

std::string Problem::var_name(int var) const
{
    const StateVariable& v = variables_.at(static_cast<std::size_t>(var));
    const FunctionSymbol& sym = signature.symbol(v.fluent);
    if (v.args.empty())
        return sym.name;
    std::string out = "(" + sym.name;
    for (std::size_t i = 0; i < v.args.size(); ++i)
        out += " " + signature.render(sym.arg_types[i], v.args[i]);
    return out + ")";
}

}  // namespace ctmp::fs
