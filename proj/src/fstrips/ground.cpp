#include "ctmp/fstrips/ground.hpp"

#include <algorithm>

namespace ctmp::fs {

namespace {

bool all_constant(const std::vector<Term>& args)
{
    return std::all_of(args.begin(), args.end(), [](const Term& t) { return t.kind == TermKind::Constant; });
}

const State& empty_state()
{
    static const State s;
    return s;
}

std::vector<std::vector<Value>> enumerate_bindings(const Problem& problem, const std::vector<Parameter>& params,
                                                   const std::string& owner)
{
    std::vector<std::vector<Value>> out;
    std::vector<std::size_t> sizes;
    for (const auto& p : params) {
        std::size_t n = problem.signature.type(p.type).size();
        if (n == 0)
            throw ModelError("parameter " + p.name + " of " + owner + " ranges over an empty type");
        sizes.push_back(n);
    }
    std::vector<std::size_t> pos(params.size(), 0);
    while (true) {
        std::vector<Value> binding;
        binding.reserve(params.size());
        for (std::size_t i = 0; i < params.size(); ++i)
            binding.push_back(problem.signature.type(params[i].type).member(pos[i]));
        out.push_back(std::move(binding));
        std::size_t i = params.size();
        while (i > 0) {
            --i;
            if (++pos[i] < sizes[i])
                break;
            pos[i] = 0;
            if (i == 0)
                return out;
        }
        if (params.empty())
            return out;
    }
}

}  // namespace

Term instantiate(const Problem& problem, const Term& term, std::span<const Value> binding)
{
    switch (term.kind) {
    case TermKind::Constant:
    case TermKind::StateVar: return term;
    case TermKind::Param:
        if (static_cast<std::size_t>(term.index) >= binding.size())
            throw ModelError("parameter index out of range");
        return Term::constant(binding[static_cast<std::size_t>(term.index)], term.type);
    case TermKind::Add:
    case TermKind::Sub:
    case TermKind::Apply: break;
    }

    Term out{term.kind, term.index, term.type, {}};
    out.args.reserve(term.args.size());
    for (const auto& a : term.args)
        out.args.push_back(instantiate(problem, a, binding));
    if (!all_constant(out.args))
        return out;

    if (term.kind == TermKind::Add)
        return Term::constant(out.args[0].index + out.args[1].index, term.type);
    if (term.kind == TermKind::Sub)
        return Term::constant(out.args[0].index - out.args[1].index, term.type);

    const FunctionSymbol& sym = problem.signature.symbol(term.index);
    if (sym.kind == SymbolKind::Fluent) {
        std::vector<Value> args;
        for (const auto& a : out.args)
            args.push_back(a.index);
        if (auto var = problem.var_index(term.index, args))
            return Term::state_var(*var, term.type);
        return out;
    }
    // Fixed denotation: fold now. Failures surface at evaluation time instead,
    // where they are reached only if the surrounding formula needs them.
    try {
        return Term::constant(eval_term(problem, empty_state(), out), term.type);
    } catch (const EvalError&) {
        return out;
    }
}

Formula instantiate(const Problem& problem, const Formula& f, std::span<const Value> binding)
{
    Formula out{f.kind, {}, {}};
    for (const auto& t : f.terms)
        out.terms.push_back(instantiate(problem, t, binding));

    switch (f.kind) {
    case FormulaKind::True:
    case FormulaKind::False: return out;
    case FormulaKind::Eq:
    case FormulaKind::Neq:
        if (all_constant(out.terms)) {
            bool eq = out.terms[0].index == out.terms[1].index;
            return Formula::truth(f.kind == FormulaKind::Eq ? eq : !eq);
        }
        return out;
    case FormulaKind::Atom:
        if (all_constant(out.terms))
            return Formula::truth(out.terms[0].index != 0);
        return out;
    case FormulaKind::Not: {
        Formula c = instantiate(problem, f.children[0], binding);
        if (c.kind == FormulaKind::True || c.kind == FormulaKind::False)
            return Formula::truth(c.kind == FormulaKind::False);
        out.children.push_back(std::move(c));
        return out;
    }
    case FormulaKind::And:
    case FormulaKind::Or: {
        const bool is_and = f.kind == FormulaKind::And;
        for (const auto& child : f.children) {
            Formula c = instantiate(problem, child, binding);
            if (c.kind == (is_and ? FormulaKind::True : FormulaKind::False))
                continue;
            if (c.kind == (is_and ? FormulaKind::False : FormulaKind::True))
                return Formula::truth(!is_and);
            out.children.push_back(std::move(c));
        }
        if (out.children.empty())
            return Formula::truth(is_and);
        if (out.children.size() == 1)
            return std::move(out.children.front());
        return out;
    }
    }
    return out;
}

GroundProblem::GroundProblem(std::shared_ptr<const Problem> problem, std::vector<GroundAction> actions,
                             std::vector<Formula> constraints, Formula goal)
    : problem_(std::move(problem)),
      actions_(std::move(actions)),
      constraints_(std::move(constraints)),
      goal_(std::move(goal)),
      goal_atoms_(conjuncts(goal_))
{
    build_index();
}

GroundProblem GroundProblem::relaxed() const
{
    return GroundProblem(problem_, actions_, {}, goal_);
}

void GroundProblem::build_index()
{
    std::unordered_map<int, std::size_t> bucket_of_var;
    for (std::size_t a = 0; a < actions_.size(); ++a) {
        bool indexed = false;
        for (const Formula& c : conjuncts(actions_[a].precondition)) {
            if (c.kind != FormulaKind::Eq)
                continue;
            const Term* var = nullptr;
            const Term* val = nullptr;
            if (c.terms[0].kind == TermKind::StateVar && c.terms[1].kind == TermKind::Constant) {
                var = &c.terms[0];
                val = &c.terms[1];
            } else if (c.terms[1].kind == TermKind::StateVar && c.terms[0].kind == TermKind::Constant) {
                var = &c.terms[1];
                val = &c.terms[0];
            } else {
                continue;
            }
            auto [it, inserted] = bucket_of_var.try_emplace(var->index, buckets_.size());
            if (inserted)
                buckets_.push_back(Bucket{var->index, {}});
            buckets_[it->second].by_value[val->index].push_back(static_cast<int>(a));
            indexed = true;
            break;
        }
        if (!indexed)
            unindexed_.push_back(static_cast<int>(a));
    }
}

void GroundProblem::candidates(const State& state, std::vector<int>& out) const
{
    out.clear();
    out.insert(out.end(), unindexed_.begin(), unindexed_.end());
    for (const Bucket& b : buckets_) {
        auto it = b.by_value.find(state[static_cast<std::size_t>(b.var)]);
        if (it != b.by_value.end())
            out.insert(out.end(), it->second.begin(), it->second.end());
    }
    std::sort(out.begin(), out.end());
}

void GroundProblem::successors(const State& state, std::vector<Successor>& out) const
{
    out.clear();
    thread_local std::vector<int> cands;
    candidates(state, cands);
    for (int a : cands)
        if (auto next = apply(state, a))
            out.push_back(Successor{a, std::move(*next)});
}

std::vector<Successor> GroundProblem::successors(const State& state) const
{
    std::vector<Successor> out;
    successors(state, out);
    return out;
}

bool GroundProblem::constraints_hold(const State& state) const
{
    return std::all_of(constraints_.begin(), constraints_.end(),
                       [&](const Formula& c) { return eval_formula(*problem_, state, c); });
}

GroundProblem ground(std::shared_ptr<const Problem> problem)
{
    const Problem& p = *problem;
    std::vector<GroundAction> actions;
    for (std::size_t s = 0; s < p.actions.size(); ++s) {
        const ActionSchema& schema = p.actions[s];
        for (auto& binding : enumerate_bindings(p, schema.params, "action " + schema.name)) {
            GroundAction ga;
            ga.schema = static_cast<int>(s);
            ga.name = "(" + schema.name;
            for (std::size_t i = 0; i < binding.size(); ++i)
                ga.name += " " + p.signature.render(schema.params[i].type, binding[i]);
            ga.name += ")";
            ga.precondition = instantiate(p, schema.precondition, binding);
            for (const Effect& e : schema.effects) {
                Effect ge;
                ge.fluent = e.fluent;
                for (const auto& a : e.args)
                    ge.args.push_back(instantiate(p, a, binding));
                ge.rhs = instantiate(p, e.rhs, binding);
                if (all_constant(ge.args)) {
                    std::vector<Value> vals;
                    for (const auto& a : ge.args)
                        vals.push_back(a.index);
                    if (auto var = p.var_index(e.fluent, vals))
                        ge.var = *var;
                }
                ga.effects.push_back(std::move(ge));
            }
            ga.args = std::move(binding);
            actions.push_back(std::move(ga));
        }
    }

    std::vector<Formula> constraints;
    for (const ConstraintSchema& schema : p.constraints)
        for (const auto& binding : enumerate_bindings(p, schema.params, "a state constraint"))
            constraints.push_back(instantiate(p, schema.body, binding));

    Formula goal = instantiate(p, p.goal, {});
    for (std::size_t i = 0; i < constraints.size(); ++i)
        if (!eval_formula(p, p.initial_state(), constraints[i]))
            throw ModelError("initial state violates ground state constraint #" + std::to_string(i));
    return GroundProblem(std::move(problem), std::move(actions), std::move(constraints), std::move(goal));
}

}  // namespace ctmp::fs
