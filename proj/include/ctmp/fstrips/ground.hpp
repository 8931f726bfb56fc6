#pragma once

#include "ctmp/fstrips/eval.hpp"

#include <memory>
#include <utility>
#include <vector>

namespace ctmp::fs {

/// Parameter substitution followed by constant folding of every
/// state-independent subterm. Fixed symbols and procedures over constants
/// are evaluated once here; fluents over constants become state variables.
Term instantiate(const Problem& problem, const Term& term, std::span<const Value> binding);
Formula instantiate(const Problem& problem, const Formula& formula, std::span<const Value> binding);

struct Successor {
    int action;
    State state;
};

/// All schemas fully instantiated. Immutable once built and safe to share.
class GroundProblem {
public:
    GroundProblem(std::shared_ptr<const Problem> problem, std::vector<GroundAction> actions,
                  std::vector<Formula> constraints, Formula goal);

    const Problem& problem() const { return *problem_; }
    std::shared_ptr<const Problem> problem_ptr() const { return problem_; }
    const std::vector<GroundAction>& actions() const { return actions_; }
    const std::vector<Formula>& constraints() const { return constraints_; }
    const Formula& goal() const { return goal_; }
    const std::vector<Formula>& goal_atoms() const { return goal_atoms_; }

    /// The same problem with the state constraints dropped.
    GroundProblem relaxed() const;

    /// Applicable actions with their result states, in ground-action order.
    std::vector<Successor> successors(const State& state) const;
    void successors(const State& state, std::vector<Successor>& out) const;

    /// Ground actions whose precondition may hold in the state, ascending.
    void candidates(const State& state, std::vector<int>& out) const;

    std::optional<State> apply(const State& state, int action) const
    {
        return try_apply(*problem_, state, actions_[static_cast<std::size_t>(action)], constraints_);
    }

    bool constraints_hold(const State& state) const;
    bool is_goal(const State& state) const { return eval_formula(*problem_, state, goal_); }

private:
    void build_index();

    std::shared_ptr<const Problem> problem_;
    std::vector<GroundAction> actions_;
    std::vector<Formula> constraints_;
    Formula goal_;
    std::vector<Formula> goal_atoms_;

    // Actions bucketed by a "var = constant" conjunct of their precondition.
    struct Bucket {
        int var;
        std::unordered_map<Value, std::vector<int>> by_value;
    };
    std::vector<Bucket> buckets_;
    std::vector<int> unindexed_;
};

/// Instantiates every action schema over the member tuples of its parameter
/// types (schema order, then lexicographic member order, last parameter
/// fastest), every constraint schema likewise, and the goal.
GroundProblem ground(std::shared_ptr<const Problem> problem);

}  // namespace ctmp::fs
