#include "ctmp/fstrips/parser.hpp"

#include "ctmp/fstrips/eval.hpp"

#include <charconv>
#include <optional>
#include <unordered_map>

namespace ctmp::fs {

std::vector<Sexp> read_sexps(std::string_view text)
{
    std::vector<Sexp> stack(1);
    stack.back().is_list = true;
    std::vector<int> open_lines;
    int line = 1;
    std::size_t i = 0;
    while (i < text.size()) {
        char c = text[i];
        if (c == '\n') {
            ++line;
            ++i;
        } else if (c == ';') {
            while (i < text.size() && text[i] != '\n')
                ++i;
        } else if (c == ' ' || c == '\t' || c == '\r') {
            ++i;
        } else if (c == '(') {
            Sexp s;
            s.is_list = true;
            s.line = line;
            stack.push_back(std::move(s));
            open_lines.push_back(line);
            ++i;
        } else if (c == ')') {
            if (stack.size() == 1)
                throw ParseError("unbalanced ')'", line);
            Sexp done = std::move(stack.back());
            stack.pop_back();
            open_lines.pop_back();
            stack.back().items.push_back(std::move(done));
            ++i;
        } else {
            std::size_t j = i;
            while (j < text.size() && text[j] != '(' && text[j] != ')' && text[j] != ';' && text[j] != ' ' &&
                   text[j] != '\t' && text[j] != '\n' && text[j] != '\r')
                ++j;
            Sexp s;
            s.atom = std::string(text.substr(i, j - i));
            s.line = line;
            stack.back().items.push_back(std::move(s));
            i = j;
        }
    }
    if (stack.size() != 1)
        throw ParseError("unclosed '('", open_lines.back());
    return std::move(stack.front().items);
}

namespace {

std::optional<Value> parse_int(const std::string& s)
{
    Value v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        return std::nullopt;
    return v;
}

constexpr int kIntLiteral = -2;

struct ParamInfo {
    int pos;
    int type;
};
using Scope = std::unordered_map<std::string, ParamInfo>;

class Builder {
public:
    explicit Builder(std::shared_ptr<const ProcedureRegistry> procs) : problem_(std::make_shared<Problem>())
    {
        problem_->procedures = std::move(procs);
    }

    std::shared_ptr<Problem> build(const std::vector<Sexp>& top)
    {
        if (top.size() != 1 || !top[0].is_list || top[0].items.empty() || !top[0].items[0].is("define"))
            throw ParseError("expected a single (define (problem NAME) ...) form", top.empty() ? 1 : top[0].line);
        const Sexp& def = top[0];
        if (def.items.size() < 2 || !def.items[1].is_list || def.items[1].items.size() != 2 ||
            !def.items[1].items[0].is("problem"))
            throw ParseError("expected (problem NAME)", def.line);
        problem_->name = def.items[1].items[1].atom;

        const Sexp* init = nullptr;
        const Sexp* goal = nullptr;
        std::vector<const Sexp*> actions, constraints;
        for (std::size_t i = 2; i < def.items.size(); ++i) {
            const Sexp& sec = def.items[i];
            if (!sec.is_list || sec.items.empty() || sec.items[0].is_list)
                throw ParseError("expected a section", sec.line);
            const std::string& head = sec.items[0].atom;
            if (head == ":types")
                parse_types(sec);
            else if (head == ":functions")
                parse_symbols(sec, SymbolKind::Fluent);
            else if (head == ":fixed")
                parse_symbols(sec, SymbolKind::FixedTable);
            else if (head == ":procedures")
                parse_symbols(sec, SymbolKind::Procedure);
            else if (head == ":init")
                init = &sec;
            else if (head == ":action")
                actions.push_back(&sec);
            else if (head == ":state-constraint")
                constraints.push_back(&sec);
            else if (head == ":goal")
                goal = &sec;
            else
                throw ParseError("unknown section '" + head + "'", sec.line);
        }

        std::vector<std::pair<StateVariable, Value>> assignments;
        if (init)
            parse_init(*init, assignments);
        for (const Sexp* a : actions)
            parse_action(*a);
        for (const Sexp* c : constraints)
            parse_constraint(*c);
        if (goal) {
            if (goal->items.size() != 2)
                throw ParseError("(:goal FORMULA) takes one formula", goal->line);
            problem_->goal = parse_formula(goal->items[1], {});
        }
        try {
            problem_->finalize(assignments);
        } catch (const ModelError& e) {
            throw ParseError(e.what(), def.line);
        }
        return problem_;
    }

private:
    Signature& sig() { return problem_->signature; }

    int require_type(const Sexp& s)
    {
        if (s.is_list)
            throw ParseError("expected a type name", s.line);
        auto t = sig().find_type(s.atom);
        if (!t)
            throw ParseError("unknown type '" + s.atom + "'", s.line);
        return *t;
    }

    void parse_types(const Sexp& sec)
    {
        for (std::size_t i = 1; i < sec.items.size(); ++i) {
            const Sexp& d = sec.items[i];
            if (!d.is_list || d.items.size() < 2 || d.items[0].is_list)
                throw ParseError("type declaration is (NAME MEMBER...) or (NAME :range LO HI)", d.line);
            try {
                if (d.items[1].is(":range")) {
                    if (d.items.size() != 4)
                        throw ParseError("(NAME :range LO HI)", d.line);
                    auto lo = parse_int(d.items[2].atom);
                    auto hi = parse_int(d.items[3].atom);
                    if (!lo || !hi)
                        throw ParseError("range bounds must be integers", d.line);
                    sig().add_int_type(d.items[0].atom, *lo, *hi);
                } else {
                    std::vector<std::string> members;
                    for (std::size_t m = 1; m < d.items.size(); ++m) {
                        if (d.items[m].is_list)
                            throw ParseError("type members are constant symbols", d.items[m].line);
                        members.push_back(d.items[m].atom);
                    }
                    sig().add_type(d.items[0].atom, std::move(members));
                }
            } catch (const ModelError& e) {
                throw ParseError(e.what(), d.line);
            }
        }
    }

    // "?a ?b - t1 ?c - t2" ; names are optional in symbol declarations.
    std::vector<Parameter> parse_typed_list(const std::vector<Sexp>& items, std::size_t from, std::size_t to, int line)
    {
        std::vector<Parameter> out;
        std::vector<std::string> pending;
        for (std::size_t i = from; i < to; ++i) {
            const Sexp& s = items[i];
            if (s.is_list)
                throw ParseError("unexpected list in typed parameter list", s.line);
            if (s.atom == "-") {
                if (i + 1 >= to || pending.empty())
                    throw ParseError("dangling '-' in typed parameter list", s.line);
                int t = require_type(items[++i]);
                for (auto& n : pending)
                    out.push_back(Parameter{n, t});
                pending.clear();
            } else {
                pending.push_back(s.atom);
            }
        }
        if (!pending.empty())
            throw ParseError("parameters without a type", line);
        return out;
    }

    void parse_symbols(const Sexp& sec, SymbolKind kind)
    {
        // (NAME ARGS) - TYPE
        const auto& it = sec.items;
        for (std::size_t i = 1; i < it.size(); ++i) {
            const Sexp& head = it[i];
            if (!head.is_list || head.items.empty() || head.items[0].is_list)
                throw ParseError("symbol declaration is (NAME ?x - T ...) - TYPE", head.line);
            if (i + 2 >= it.size() || !it[i + 1].is("-"))
                throw ParseError("missing '- TYPE' after declaration of " + head.items[0].atom, head.line);
            FunctionSymbol sym;
            sym.name = head.items[0].atom;
            sym.kind = kind;
            for (const auto& p : parse_typed_list(head.items, 1, head.items.size(), head.line))
                sym.arg_types.push_back(p.type);
            sym.value_type = require_type(it[i + 2]);
            sym.closed_world = kind == SymbolKind::FixedTable && sym.value_type == sig().bool_type();
            try {
                sig().add_symbol(std::move(sym));
            } catch (const ModelError& e) {
                throw ParseError(e.what(), head.line);
            }
            i += 2;
        }
    }

    bool is_member(int type, Value v) const { return problem_->signature.type(type).position(v).has_value(); }

    bool assignable(int from, int to) const
    {
        if (from == to)
            return true;
        const Signature& s = problem_->signature;
        const TypeDef& a = s.type(from);
        const TypeDef& b = s.type(to);
        if (a.kind != b.kind)
            return false;
        if (a.kind == TypeKind::IntRange)
            return a.lo >= b.lo && a.hi <= b.hi;
        if (a.kind == TypeKind::Bool)
            return true;
        for (Value m : a.members)
            if (!b.position(m))
                return false;
        return true;
    }

    // Types a term may be coerced to. Constants and literals adopt the
    // expected type when they belong to it.
    Term coerce(Term t, int expected, int line)
    {
        if (expected < 0)
            return t;
        if (t.type == kIntLiteral) {
            if (sig().type(expected).kind != TypeKind::IntRange)
                throw ParseError("integer literal where a " + sig().type(expected).name + " is expected", line);
            if (!is_member(expected, t.index))
                throw ParseError("literal " + std::to_string(t.index) + " outside " + sig().type(expected).name, line);
            t.type = expected;
            return t;
        }
        if (t.kind == TermKind::Constant) {
            if (!is_member(expected, t.index))
                throw ParseError("constant '" + sig().render(t.type, t.index) + "' is not a " +
                                     sig().type(expected).name,
                                 line);
            t.type = expected;
            return t;
        }
        if (!assignable(t.type, expected))
            throw ParseError("type mismatch: " + sig().type(t.type).name + " where " + sig().type(expected).name +
                                 " is expected",
                             line);
        return t;
    }

    Term parse_term(const Sexp& s, const Scope& scope, int expected)
    {
        if (!s.is_list) {
            const std::string& a = s.atom;
            if (!a.empty() && a[0] == '?') {
                auto it = scope.find(a);
                if (it == scope.end())
                    throw ParseError("unbound parameter " + a, s.line);
                return coerce(Term::param(it->second.pos, it->second.type), expected, s.line);
            }
            if (a == "true" || a == "false")
                return coerce(Term::constant(a == "true" ? 1 : 0, sig().bool_type()), expected, s.line);
            if (auto v = parse_int(a))
                return coerce(Term{TermKind::Constant, *v, kIntLiteral, {}}, expected, s.line);
            if (auto sym = sig().find_symbol(a)) {
                if (!sig().symbol(*sym).arg_types.empty())
                    throw ParseError("symbol '" + a + "' needs arguments", s.line);
                return coerce(Term::apply(*sym, sig().symbol(*sym).value_type, {}), expected, s.line);
            }
            if (auto c = sig().find_constant(a)) {
                int type = expected;
                if (type < 0) {
                    for (std::size_t t = 0; t < sig().type_count(); ++t)
                        if (sig().type(static_cast<int>(t)).kind == TypeKind::Symbolic &&
                            is_member(static_cast<int>(t), *c)) {
                            type = static_cast<int>(t);
                            break;
                        }
                }
                return coerce(Term::constant(*c, type), expected, s.line);
            }
            throw ParseError("unknown symbol '" + a + "'", s.line);
        }
        if (s.items.empty() || s.items[0].is_list)
            throw ParseError("expected (SYMBOL ARGS...)", s.line);
        const std::string& head = s.items[0].atom;
        if (head == "+" || head == "-") {
            if (s.items.size() != 3)
                throw ParseError("'" + head + "' takes two arguments", s.line);
            Term a = parse_term(s.items[1], scope, expected);
            Term b = parse_term(s.items[2], scope, a.type >= 0 ? a.type : expected);
            if (a.type == kIntLiteral && b.type >= 0)
                a = coerce(a, b.type, s.line);
            if (a.type < 0 || sig().type(a.type).kind != TypeKind::IntRange)
                throw ParseError("arithmetic needs integer-typed operands", s.line);
            Term t{head == "+" ? TermKind::Add : TermKind::Sub, 0, a.type, {std::move(a), std::move(b)}};
            return t;  // range is checked when the value is stored
        }
        auto sym = sig().find_symbol(head);
        if (!sym)
            throw ParseError("unknown function symbol '" + head + "'", s.line);
        const FunctionSymbol& fs = sig().symbol(*sym);
        if (s.items.size() - 1 != fs.arg_types.size())
            throw ParseError("'" + head + "' takes " + std::to_string(fs.arg_types.size()) + " arguments", s.line);
        std::vector<Term> args;
        for (std::size_t i = 1; i < s.items.size(); ++i)
            args.push_back(parse_term(s.items[i], scope, fs.arg_types[i - 1]));
        return coerce(Term::apply(*sym, fs.value_type, std::move(args)), expected, s.line);
    }

    std::pair<Term, Term> parse_pair(const Sexp& a, const Sexp& b, const Scope& scope)
    {
        Term l = parse_term(a, scope, -1);
        if (l.type == kIntLiteral || (l.kind == TermKind::Constant && !a.is_list)) {
            Term r = parse_term(b, scope, -1);
            if (r.type >= 0)
                l = parse_term(a, scope, r.type);
            else if (l.type >= 0)
                r = parse_term(b, scope, l.type);
            return {std::move(l), std::move(r)};
        }
        Term r = parse_term(b, scope, l.type);
        return {std::move(l), std::move(r)};
    }

    Formula parse_formula(const Sexp& s, const Scope& scope)
    {
        if (!s.is_list) {
            if (s.is("true") || s.is("false"))
                return Formula::truth(s.is("true"));
            Term t = parse_term(s, scope, sig().bool_type());
            return Formula{FormulaKind::Atom, {std::move(t)}, {}};
        }
        if (s.items.empty() || s.items[0].is_list)
            throw ParseError("expected a formula", s.line);
        const std::string& head = s.items[0].atom;
        if (head == "and" || head == "or") {
            Formula f{head == "and" ? FormulaKind::And : FormulaKind::Or, {}, {}};
            for (std::size_t i = 1; i < s.items.size(); ++i)
                f.children.push_back(parse_formula(s.items[i], scope));
            return f;
        }
        if (head == "not") {
            if (s.items.size() != 2)
                throw ParseError("'not' takes one formula", s.line);
            return Formula{FormulaKind::Not, {}, {parse_formula(s.items[1], scope)}};
        }
        if (head == "=" || head == "!=") {
            if (s.items.size() != 3)
                throw ParseError("'" + head + "' takes two terms", s.line);
            auto [l, r] = parse_pair(s.items[1], s.items[2], scope);
            return Formula{head == "=" ? FormulaKind::Eq : FormulaKind::Neq, {std::move(l), std::move(r)}, {}};
        }
        Term t = parse_term(s, scope, sig().bool_type());
        return Formula{FormulaKind::Atom, {std::move(t)}, {}};
    }

    void parse_effects(const Sexp& s, const Scope& scope, std::vector<Effect>& out)
    {
        if (!s.is_list || s.items.empty())
            throw ParseError("expected an effect", s.line);
        if (s.items[0].is("and")) {
            for (std::size_t i = 1; i < s.items.size(); ++i)
                parse_effects(s.items[i], scope, out);
            return;
        }
        if (!s.items[0].is(":=") || s.items.size() != 3)
            throw ParseError("effects are (:= LHS RHS)", s.line);
        Term lhs = parse_term(s.items[1], scope, -1);
        if (lhs.kind != TermKind::Apply || sig().symbol(lhs.index).kind != SymbolKind::Fluent)
            throw ParseError("effect target must be a fluent term", s.line);
        Effect e;
        e.fluent = lhs.index;
        e.args = std::move(lhs.args);
        e.rhs = parse_term(s.items[2], scope, lhs.type);
        out.push_back(std::move(e));
    }

    // Keyword arguments of :action / :state-constraint.
    static const Sexp* keyword(const Sexp& sec, std::initializer_list<std::string_view> names)
    {
        for (std::size_t i = 1; i + 1 < sec.items.size(); ++i)
            for (auto n : names)
                if (sec.items[i].is(n))
                    return &sec.items[i + 1];
        return nullptr;
    }

    Scope make_scope(const std::vector<Parameter>& params, int line)
    {
        Scope scope;
        for (std::size_t i = 0; i < params.size(); ++i)
            if (!scope.emplace(params[i].name, ParamInfo{static_cast<int>(i), params[i].type}).second)
                throw ParseError("duplicate parameter " + params[i].name, line);
        return scope;
    }

    std::vector<Parameter> params_of(const Sexp& sec)
    {
        const Sexp* p = keyword(sec, {":parameters", ":parameter"});
        if (!p)
            return {};
        if (!p->is_list)
            throw ParseError(":parameters expects a list", p->line);
        return parse_typed_list(p->items, 0, p->items.size(), p->line);
    }

    void parse_action(const Sexp& sec)
    {
        if (sec.items.size() < 2 || sec.items[1].is_list)
            throw ParseError("(:action NAME ...)", sec.line);
        ActionSchema a;
        a.name = sec.items[1].atom;
        a.params = params_of(sec);
        Scope scope = make_scope(a.params, sec.line);
        if (const Sexp* pre = keyword(sec, {":prec", ":precondition"}))
            a.precondition = parse_formula(*pre, scope);
        if (const Sexp* eff = keyword(sec, {":eff", ":effect"}))
            parse_effects(*eff, scope, a.effects);
        problem_->actions.push_back(std::move(a));
    }

    void parse_constraint(const Sexp& sec)
    {
        ConstraintSchema c;
        c.params = params_of(sec);
        Scope scope = make_scope(c.params, sec.line);
        const Sexp& body = sec.items.back();
        if (sec.items.size() < 2 || !body.is_list || &body == keyword(sec, {":parameters", ":parameter"}))
            throw ParseError("(:state-constraint [:parameters (...)] FORMULA)", sec.line);
        c.body = parse_formula(body, scope);
        problem_->constraints.push_back(std::move(c));
    }

    void parse_init(const Sexp& sec, std::vector<std::pair<StateVariable, Value>>& out)
    {
        for (std::size_t i = 1; i < sec.items.size(); ++i) {
            const Sexp& a = sec.items[i];
            Term lhs;
            Value value = 1;
            if (a.is_list && !a.items.empty() && a.items[0].is("=")) {
                if (a.items.size() != 3)
                    throw ParseError("(= TERM VALUE)", a.line);
                lhs = parse_term(a.items[1], {}, -1);
                Term rhs = parse_term(a.items[2], {}, lhs.type);
                if (rhs.kind != TermKind::Constant)
                    throw ParseError("initial values must be constants", a.line);
                value = rhs.index;
            } else {
                lhs = parse_term(a, {}, sig().bool_type());
            }
            if (lhs.kind != TermKind::Apply)
                throw ParseError("initial atom must apply a symbol", a.line);
            std::vector<Value> args;
            for (const auto& t : lhs.args) {
                if (t.kind != TermKind::Constant)
                    throw ParseError("initial atoms take constant arguments", a.line);
                args.push_back(t.index);
            }
            FunctionSymbol& sym = sig().symbol_mut(lhs.index);
            if (sym.kind == SymbolKind::Fluent) {
                out.push_back({StateVariable{lhs.index, std::move(args)}, value});
            } else if (sym.kind == SymbolKind::FixedTable) {
                auto key = table_key(args);
                auto [it, ins] = sym.table.emplace(key, value);
                if (!ins && it->second != value)
                    throw ParseError("conflicting table entries for '" + sym.name + "'", a.line);
            } else {
                throw ParseError("procedures cannot be given extensionally", a.line);
            }
        }
    }

    std::shared_ptr<Problem> problem_;
};

}  // namespace

std::shared_ptr<Problem> parse_problem(std::string_view text, std::shared_ptr<const ProcedureRegistry> procedures)
{
    return Builder(std::move(procedures)).build(read_sexps(text));
}

}  // namespace ctmp::fs
