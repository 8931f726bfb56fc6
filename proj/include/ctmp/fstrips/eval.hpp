#pragma once

#include "ctmp/fstrips/model.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ctmp::fs {

struct GroundAction {
    int schema = -1;
    std::vector<Value> args;
    std::string name;  // "(move b1 b2)"
    Formula precondition;
    std::vector<Effect> effects;
};

/// Denotation t^s. Parameters must have been substituted.
Value eval_term(const Problem& problem, const State& state, const Term& term);

bool eval_formula(const Problem& problem, const State& state, const Formula& formula);

/// The successor s_a: every effect is evaluated in the source state before
/// any write. Two effects writing different values to the same state
/// variable raise ModelError.
State apply_effects(const Problem& problem, const State& state, const GroundAction& action);

/// Pre(a) holds in s and every ground constraint holds in s_a.
bool is_applicable(const Problem& problem, const State& state, const GroundAction& action,
                   std::span<const Formula> constraints);

/// Same test as is_applicable, returning s_a when the action is applicable.
std::optional<State> try_apply(const Problem& problem, const State& state, const GroundAction& action,
                               std::span<const Formula> constraints);

inline bool goal_satisfied(const Problem& problem, const State& state, const Formula& goal)
{
    return eval_formula(problem, state, goal);
}

/// Key used by extensional fixed-symbol tables.
std::string table_key(std::span<const Value> args);

}  // namespace ctmp::fs
