#pragma once

// Shared test fixtures: cached tables, hand-built instances and oracles that
// do not go through the code under test.

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ctmp/compile/compile.hpp"
#include "ctmp/precompile/tables.hpp"

namespace fixtures {

using namespace ctmp;

std::shared_ptr<const pre::Tables> tables(const std::string& scene_file);
std::shared_ptr<const pre::Tables> one_table();
std::shared_ptr<const pre::Tables> micro();

cmp::Plan named(const cmp::CompiledProblem& cp, const std::vector<int>& actions);

/// State edits for counter fixtures. `holding` puts o in the hand, `placed`
/// puts o on config c (emptying the hand if o was held).
fs::State holding(const cmp::CompiledProblem& cp, fs::State s, int o);
fs::State placed(const cmp::CompiledProblem& cp, fs::State s, int o, int config);

/// Incremental novelty against brute-force enumeration of seen atoms and
/// pairs, on random sequences over at most 6 variables with at most 8
/// values, with and without partitions, arities 1 and 2. Returns the number
/// of disagreements.
int novelty_oracle_mismatches(int sequences, unsigned seed);

/// (base, approach trajectory) pairs grasping at a real config.
std::vector<std::pair<int, int>> approaches(const pre::Tables& t, int config);

/// Every approach to each config (and its way back), holding or not, misses
/// all the others.
bool mutually_clear(const pre::Tables& t, const std::vector<int>& configs);

/// Two objects with goals, all four configs mutually clear.
cmp::Instance uncluttered_pair(const pre::Tables& t, int skip = 0);

/// Two mutually clear objects whose goals are each other's configs.
cmp::Instance swap_pair(const pre::Tables& t, int skip = 0);

struct Blocked {
    cmp::Instance instance;  // o0 is the goal object, o1 the blocker
    std::vector<std::pair<int, int>> approaches;
};
/// A goal object whose every approach runs into a second object, which
/// itself can be picked up.
std::optional<Blocked> blocked_goal(const pre::Tables& t);

}  // namespace fixtures
