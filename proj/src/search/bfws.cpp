#include <queue>

#include <absl/container/flat_hash_set.h>

#include "ctmp/search/search.hpp"

namespace ctmp::search {

namespace {

struct Entry {
    std::vector<int> key;  // novelty, heuristics, generation order
    int node;
};

struct Worse {
    bool operator()(const Entry& a, const Entry& b) const { return a.key > b.key; }
};

}  // namespace

BfwsResult bfws(const fs::GroundProblem& g, const FeatureMap& features, const BfwsOptions& opt)
{
    Clock clock;
    BfwsResult r;
    std::vector<Node> nodes;
    absl::flat_hash_set<fs::State, fs::StateHash> seen;
    std::priority_queue<Entry, std::vector<Entry>, Worse> open;
    NoveltyTable table(features.size(), 2);
    std::vector<int> atoms;
    std::vector<int> h(opt.heuristics.size());
    int order = 0;

    const auto finish = [&](Outcome o, int goal_node) {
        r.outcome = o;
        if (goal_node >= 0)
            r.plan = extract_plan(nodes, goal_node);
        r.stats.seconds = clock.seconds();
        return r;
    };
    const auto evaluate = [&](const fs::State& s) {
        for (std::size_t i = 0; i < h.size(); ++i)
            h[i] = opt.heuristics[i](s);
        features.atoms(s, atoms);
        return table.evaluate(atoms, h);
    };
    const auto push = [&](int w, int node) {
        Entry e{{w}, node};
        e.key.insert(e.key.end(), h.begin(), h.end());
        e.key.push_back(order++);
        open.push(std::move(e));
    };

    const fs::State& init = g.problem().initial_state();
    const int w0 = evaluate(init);
    r.initial_h = h;
    ++r.stats.novelty[static_cast<std::size_t>(w0)];
    r.stats.generated = 1;
    nodes.push_back({init, -1, -1, 0});
    seen.insert(init);
    if (g.is_goal(init))
        return finish(Outcome::Solved, 0);
    push(w0, 0);

    std::vector<fs::Successor> succ;
    while (!open.empty()) {
        if (opt.limits.time_budget >= 0 && clock.seconds() > opt.limits.time_budget)
            return finish(Outcome::TimeBudget, -1);
        const int cur = open.top().node;
        open.pop();
        ++r.stats.expanded;
        g.successors(nodes[static_cast<std::size_t>(cur)].state, succ);
        const int depth = nodes[static_cast<std::size_t>(cur)].depth + 1;
        for (auto& s : succ) {
            if (opt.limits.node_budget >= 0 && r.stats.generated >= opt.limits.node_budget)
                return finish(Outcome::NodeBudget, -1);
            ++r.stats.generated;
            if (!seen.insert(s.state).second)
                continue;
            const int w = evaluate(s.state);
            ++r.stats.novelty[static_cast<std::size_t>(w)];
            if (w > 2 && opt.prune_w3)
                continue;
            nodes.push_back({std::move(s.state), cur, s.action, depth});
            const int id = static_cast<int>(nodes.size()) - 1;
            if (g.is_goal(nodes.back().state))
                return finish(Outcome::Solved, id);
            push(w, id);
        }
    }
    return finish(Outcome::Exhausted, -1);
}

}  // namespace ctmp::search
