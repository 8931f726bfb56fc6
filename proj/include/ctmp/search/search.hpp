#pragma once

#include <array>
#include <chrono>
#include <functional>
#include <string>
#include <vector>

#include "ctmp/fstrips/ground.hpp"
#include "ctmp/search/novelty.hpp"

namespace ctmp::search {

/// Resource limits; negative means unlimited. The node budget counts
/// generated nodes.
struct Limits {
    long long node_budget = -1;
    double time_budget = -1;
};

enum class Outcome { Solved, Exhausted, NodeBudget, TimeBudget };

std::string to_string(Outcome o);

struct Stats {
    long long expanded = 0;
    long long generated = 0;
    std::array<long long, 4> novelty{};  // index w = 1, 2, 3
    double seconds = 0;
};

struct Node {
    fs::State state;
    int parent = -1;
    int action = -1;
    int depth = 0;
};

struct Result {
    Outcome outcome = Outcome::Exhausted;
    std::vector<int> plan;  // ground action indices
    Stats stats;
};

/// Action indices from the root to node `id`.
std::vector<int> extract_plan(const std::vector<Node>& nodes, int id);

using GoalTest = std::function<bool(const fs::State&)>;

/// Hooks for IW runs. `prune` drops generated states outright. `on_generate`
/// sees every kept node and may stop the search by returning true;
/// `on_layer` runs once a depth layer has been fully generated and may stop
/// it likewise. Stopping through a hook reports Solved.
struct IwHooks {
    std::function<bool(const fs::State&)> prune;
    std::function<bool(const std::vector<Node>&, int)> on_generate;
    std::function<bool(const std::vector<Node>&, int depth)> on_layer;
};

/// Breadth-first search pruning every generated node whose novelty exceeds
/// `k` (one partition). The goal is tested on generation. The tree is kept
/// in `tree` when non-null.
Result iw(const fs::GroundProblem& g, const FeatureMap& features, int k, const fs::State& init,
          const GoalTest& goal, const Limits& limits, std::vector<Node>* tree = nullptr,
          const IwHooks& hooks = {});

/// IW(1), then IW(2) if IW(1) fails without exhausting a budget.
Result iw_driver(const fs::GroundProblem& g, const FeatureMap& features, const fs::State& init,
                 const GoalTest& goal, const Limits& limits, const IwHooks& hooks = {});

/// Serialized IW: each episode runs the IW driver until a state with strictly
/// more goal atoms true. States losing an achieved goal atom are pruned.
Result siw(const fs::GroundProblem& g, const FeatureMap& features, const Limits& limits);

/// A heuristic evaluated on every generated node; smaller is better.
using Heuristic = std::function<int(const fs::State&)>;

struct BfwsOptions {
    /// Tie-breakers after novelty, in order. Their values also key the
    /// novelty partitions.
    std::vector<Heuristic> heuristics;
    /// Drop nodes of novelty greater than 2 instead of queueing them last.
    bool prune_w3 = false;
    Limits limits;
};

struct BfwsResult : Result {
    std::vector<int> initial_h;
};

/// Best-first width search ordered by (novelty, h1, ..., hn, generation
/// order). Duplicate states are discarded at generation.
BfwsResult bfws(const fs::GroundProblem& g, const FeatureMap& features, const BfwsOptions& opt);

/// Number of goal conjuncts false in the state.
int goal_count(const fs::GroundProblem& g, const fs::State& s);

class Clock {
public:
    Clock() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const
    {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

}  // namespace ctmp::search
