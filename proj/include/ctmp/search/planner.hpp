#pragma once

// Search configured for compiled pick-and-place problems: the three counters,
// the derived graspable*/placeable* features and the obstructing-config set.

#include <string>
#include <vector>

#include "ctmp/compile/compile.hpp"
#include "ctmp/search/search.hpp"

namespace ctmp::search {

/// Grasp(o) then Place(o) ground action ids, per object.
std::vector<int> derived_feature_actions(const cmp::CompiledProblem& cp);
FeatureMap make_features(const cmp::CompiledProblem& cp);

/// Twice the goal objects off their goal config, minus one if one of them is
/// held.
int heuristic_m(const cmp::CompiledProblem& cp, const fs::State& s);
/// Objects whose config is marked in `obstructing` (indexed by real config).
int heuristic_c(const cmp::CompiledProblem& cp, const std::vector<bool>& obstructing, const fs::State& s);

/// Objects placed where the last arm motion sweeps, per the overlap tables.
std::vector<int> violated_objects(const cmp::CompiledProblem& cp, const fs::State& s);

struct ObstructingSet {
    std::vector<int> configs;   // sorted real config ids
    std::vector<bool> member;   // indexed by real config
    bool unreachable = false;   // some target atom not reached in the relaxation
    Outcome outcome = Outcome::Exhausted;  // of the underlying IW(2) run
    Stats stats;
};

/// One IW(2) pass over the problem without state constraints. For each goal
/// atom, the relaxed plans ending in the first layer that reaches it are
/// scored by the number of distinct objects they run through; the configs
/// hit by a cheapest one are obstructing. Holding any object that starts in
/// an obstructing config becomes a further target, up to a fixpoint.
ObstructingSet compute_obstructing_set(const cmp::CompiledProblem& cp, const Limits& limits = {});

enum class Algorithm { Iw, Siw, Bfws };
enum class Counter { C, M, G };

struct PlannerConfig {
    Algorithm algorithm = Algorithm::Bfws;
    std::vector<Counter> order{Counter::C, Counter::M, Counter::G};
    bool prune_w3 = false;
    /// IW/SIW only: on exhaustion, spend what is left of the budget on BFWS.
    bool fallback_bfws = false;
    Limits limits;       // search
    Limits prep_limits;  // obstructing-set pass
};

Algorithm parse_algorithm(const std::string& s);
Counter parse_counter(const std::string& s);
std::string to_string(Algorithm a);
std::string to_string(Counter c);

/// Outcome labels: solved, timeout, memory-out, unsolvable, and failed for
/// an incomplete search that ran dry.
struct PlanRun {
    std::string outcome;
    Algorithm algorithm = Algorithm::Bfws;  // the one that produced the outcome
    std::vector<int> plan;
    Stats stats;
    int c0 = 0, m0 = 0, g0 = 0;
    std::vector<int> obstructing;
    double prep_seconds = 0, search_seconds = 0, total_seconds = 0;
};

PlanRun plan(const cmp::CompiledProblem& cp, const PlannerConfig& cfg);

}  // namespace ctmp::search
