#include "ctmp/search/search.hpp"

#include <algorithm>

namespace ctmp::search {

std::string to_string(Outcome o)
{
    switch (o) {
    case Outcome::Solved: return "solved";
    case Outcome::Exhausted: return "exhausted";
    case Outcome::NodeBudget: return "node-budget";
    case Outcome::TimeBudget: return "time-budget";
    }
    return "?";
}

std::vector<int> extract_plan(const std::vector<Node>& nodes, int id)
{
    std::vector<int> plan;
    for (int n = id; n >= 0 && nodes[static_cast<std::size_t>(n)].parent >= 0; n = nodes[static_cast<std::size_t>(n)].parent)
        plan.push_back(nodes[static_cast<std::size_t>(n)].action);
    std::reverse(plan.begin(), plan.end());
    return plan;
}

int goal_count(const fs::GroundProblem& g, const fs::State& s)
{
    int n = 0;
    for (const auto& a : g.goal_atoms())
        n += fs::eval_formula(g.problem(), s, a) ? 0 : 1;
    return n;
}

namespace {

bool out_of_time(const Clock& clock, const Limits& limits)
{
    return limits.time_budget >= 0 && clock.seconds() > limits.time_budget;
}

Limits remaining(const Limits& limits, const Stats& used)
{
    Limits l = limits;
    if (l.node_budget >= 0)
        l.node_budget = std::max<long long>(0, l.node_budget - used.generated);
    if (l.time_budget >= 0)
        l.time_budget = std::max(0.0, l.time_budget - used.seconds);
    return l;
}

void accumulate(Stats& into, const Stats& s)
{
    into.expanded += s.expanded;
    into.generated += s.generated;
    for (std::size_t i = 0; i < into.novelty.size(); ++i)
        into.novelty[i] += s.novelty[i];
    into.seconds += s.seconds;
}

}  // namespace

Result iw(const fs::GroundProblem& g, const FeatureMap& features, int k, const fs::State& init,
          const GoalTest& goal, const Limits& limits, std::vector<Node>* tree, const IwHooks& hooks)
{
    Clock clock;
    Result r;
    std::vector<Node> local;
    std::vector<Node>& nodes = tree ? *tree : local;
    nodes.clear();
    NoveltyTable table(features.size(), k);
    std::vector<int> atoms;
    const auto finish = [&](Outcome o, int goal_node) {
        r.outcome = o;
        if (goal_node >= 0)
            r.plan = extract_plan(nodes, goal_node);
        r.stats.seconds = clock.seconds();
        return r;
    };

    features.atoms(init, atoms);
    table.evaluate(atoms, {});
    nodes.push_back({init, -1, -1, 0});
    r.stats.generated = 1;
    r.stats.novelty[1] += 1;
    if (goal(init))
        return finish(Outcome::Solved, 0);
    if (hooks.on_generate && hooks.on_generate(nodes, 0))
        return finish(Outcome::Solved, 0);
    if (hooks.on_layer && hooks.on_layer(nodes, 0))
        return finish(Outcome::Solved, -1);

    std::vector<fs::Successor> succ;
    int layer = 0;
    for (std::size_t cursor = 0; cursor < nodes.size(); ++cursor) {
        if (nodes[cursor].depth > layer) {
            layer = nodes[cursor].depth;
            if (hooks.on_layer && hooks.on_layer(nodes, layer))
                return finish(Outcome::Solved, -1);
        }
        if (out_of_time(clock, limits))
            return finish(Outcome::TimeBudget, -1);
        ++r.stats.expanded;
        const int depth = nodes[cursor].depth + 1;
        g.successors(nodes[cursor].state, succ);
        for (auto& s : succ) {
            if (limits.node_budget >= 0 && r.stats.generated >= limits.node_budget)
                return finish(Outcome::NodeBudget, -1);
            ++r.stats.generated;
            if (hooks.prune && hooks.prune(s.state))
                continue;
            features.atoms(s.state, atoms);
            const int w = table.evaluate(atoms, {});
            ++r.stats.novelty[static_cast<std::size_t>(w)];
            if (w > k)
                continue;
            nodes.push_back({std::move(s.state), static_cast<int>(cursor), s.action, depth});
            const int id = static_cast<int>(nodes.size()) - 1;
            if (goal(nodes.back().state))
                return finish(Outcome::Solved, id);
            if (hooks.on_generate && hooks.on_generate(nodes, id))
                return finish(Outcome::Solved, id);
        }
    }
    // The last layer is complete once the queue runs dry.
    if (hooks.on_layer && !nodes.empty() && nodes.back().depth > layer && hooks.on_layer(nodes, nodes.back().depth))
        return finish(Outcome::Solved, -1);
    return finish(Outcome::Exhausted, -1);
}

Result iw_driver(const fs::GroundProblem& g, const FeatureMap& features, const fs::State& init,
                 const GoalTest& goal, const Limits& limits, const IwHooks& hooks)
{
    Result first = iw(g, features, 1, init, goal, limits, nullptr, hooks);
    if (first.outcome != Outcome::Exhausted)
        return first;
    Result second = iw(g, features, 2, init, goal, remaining(limits, first.stats), nullptr, hooks);
    accumulate(second.stats, first.stats);
    return second;
}

Result siw(const fs::GroundProblem& g, const FeatureMap& features, const Limits& limits)
{
    const auto& atoms = g.goal_atoms();
    const fs::Problem& p = g.problem();
    const auto achieved = [&](const fs::State& s) {
        std::vector<bool> a;
        for (const auto& f : atoms)
            a.push_back(fs::eval_formula(p, s, f));
        return a;
    };
    Result r;
    fs::State s = p.initial_state();
    std::vector<bool> have = achieved(s);
    while (std::count(have.begin(), have.end(), true) < static_cast<long>(have.size())) {
        const long before = std::count(have.begin(), have.end(), true);
        const GoalTest test = [&](const fs::State& t) {
            long n = 0;
            for (const auto& f : atoms)
                n += fs::eval_formula(p, t, f);
            return n > before;
        };
        IwHooks hooks;
        hooks.prune = [&](const fs::State& t) {
            for (std::size_t i = 0; i < atoms.size(); ++i)
                if (have[i] && !fs::eval_formula(p, t, atoms[i]))
                    return true;
            return false;
        };
        Result ep = iw_driver(g, features, s, test, remaining(limits, r.stats), hooks);
        accumulate(r.stats, ep.stats);
        if (ep.outcome != Outcome::Solved) {
            r.outcome = ep.outcome;
            r.plan.clear();
            return r;
        }
        for (int a : ep.plan) {
            s = *g.apply(s, a);
            r.plan.push_back(a);
        }
        have = achieved(s);
    }
    r.outcome = Outcome::Solved;
    return r;
}

}  // namespace ctmp::search
