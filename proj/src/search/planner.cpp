#include "ctmp/search/planner.hpp"

#include <algorithm>
#include <stdexcept>

namespace ctmp::search {

std::vector<int> derived_feature_actions(const cmp::CompiledProblem& cp)
{
    std::vector<int> grasp(static_cast<std::size_t>(cp.n_objects()), -1), place = grasp;
    const auto& acts = cp.ground->actions();
    for (std::size_t a = 0; a < acts.size(); ++a) {
        const auto& name = cp.problem->actions[static_cast<std::size_t>(acts[a].schema)].name;
        if (name != "Grasp" && name != "Place")
            continue;
        const int o = cp.vocab->object_of[static_cast<std::size_t>(acts[a].args[0])];
        (name == "Grasp" ? grasp : place)[static_cast<std::size_t>(o)] = static_cast<int>(a);
    }
    std::vector<int> out;
    for (int o = 0; o < cp.n_objects(); ++o) {
        out.push_back(grasp[static_cast<std::size_t>(o)]);
        out.push_back(place[static_cast<std::size_t>(o)]);
    }
    return out;
}

FeatureMap make_features(const cmp::CompiledProblem& cp)
{
    return FeatureMap(*cp.ground, derived_feature_actions(cp));
}

int heuristic_m(const cmp::CompiledProblem& cp, const fs::State& s)
{
    const int held = cp.held(s);
    int h = 0;
    for (const auto& g : cp.goals)
        if (cp.conf(s, g.object) != g.config)
            h += g.object == held ? 1 : 2;
    return h;
}

int heuristic_c(const cmp::CompiledProblem& cp, const std::vector<bool>& obstructing, const fs::State& s)
{
    int n = 0;
    for (int o = 0; o < cp.n_objects(); ++o) {
        const int c = cp.conf(s, o);
        n += c >= 0 && obstructing[static_cast<std::size_t>(c)];
    }
    return n;
}

std::vector<int> violated_objects(const cmp::CompiledProblem& cp, const fs::State& s)
{
    std::vector<int> out;
    const int traj = cp.traj(s);
    if (traj < 0)
        return out;
    const int b = cp.base(s);
    const bool holding = cp.held(s) >= 0;
    for (int o = 0; o < cp.n_objects(); ++o) {
        const int c = cp.conf(s, o);
        if (c >= 0 && !cp.tables->proc_nonoverlap(b, traj, c, holding))
            out.push_back(o);
    }
    return out;
}

namespace {

struct Target {
    int var;
    fs::Value value;
    bool goal;
    int depth = -1;          // first layer reaching the atom
    std::vector<int> nodes;  // nodes of that layer satisfying it
};

// Configs run through by the cheapest relaxed plan among the target's nodes.
std::vector<int> cheapest_blockers(const cmp::CompiledProblem& cp, const std::vector<Node>& tree, const Target& t)
{
    std::size_t best_objects = SIZE_MAX;
    std::vector<int> best;
    for (int n : t.nodes) {
        std::vector<bool> hit(static_cast<std::size_t>(cp.n_objects()), false);
        std::vector<int> configs;
        std::size_t objects = 0;
        for (int m = n; m > 0; m = tree[static_cast<std::size_t>(m)].parent) {
            const fs::State& s = tree[static_cast<std::size_t>(m)].state;
            for (int o : violated_objects(cp, s)) {
                configs.push_back(cp.conf(s, o));
                if (!hit[static_cast<std::size_t>(o)]) {
                    hit[static_cast<std::size_t>(o)] = true;
                    ++objects;
                }
            }
        }
        if (objects < best_objects) {
            best_objects = objects;
            best = std::move(configs);
        }
    }
    return best;
}

}  // namespace

ObstructingSet compute_obstructing_set(const cmp::CompiledProblem& cp, const Limits& limits)
{
    ObstructingSet out;
    out.member.assign(static_cast<std::size_t>(cp.tables->n_real()), false);
    const fs::GroundProblem relaxed = cp.ground->relaxed();
    // The config under the gripper makes "over config C while holding o" a
    // pair, so goals that need carrying an object across bases stay within
    // width 2.
    const auto& tables = *cp.tables;
    const int n_real = tables.n_real();
    ValueFeature pose{[&cp, &tables, n_real](const fs::State& s) {
                          const int c = tables.proc_pose(cp.base(s), cp.arm(s));
                          return c < 0 ? n_real : c;
                      },
                      n_real + 1};
    const FeatureMap features(relaxed, {}, {pose});
    const auto& voc = *cp.vocab;

    std::vector<Target> targets;
    for (const auto& g : cp.goals)
        targets.push_back({cp.conf_var[static_cast<std::size_t>(g.object)], voc.conf[static_cast<std::size_t>(g.config)], true, -1, {}});
    std::vector<bool> hold_target(static_cast<std::size_t>(cp.n_objects()), false);

    const auto record = [](Target& t, const Node& node, int id) {
        if ((t.depth < 0 || t.depth == node.depth) && node.state[static_cast<std::size_t>(t.var)] == t.value) {
            t.depth = node.depth;
            t.nodes.push_back(id);
        }
    };
    const auto all_reached = [&] {
        return std::all_of(targets.begin(), targets.end(), [](const Target& t) { return t.depth >= 0; });
    };
    // Recomputes the set from scratch; returns true when it adds targets.
    const auto close = [&](const std::vector<Node>& tree) {
        std::fill(out.member.begin(), out.member.end(), false);
        for (const auto& t : targets)
            if (t.depth >= 0)
                for (int c : cheapest_blockers(cp, tree, t))
                    out.member[static_cast<std::size_t>(c)] = true;
        bool added = false;
        for (int o = 0; o < cp.n_objects(); ++o) {
            if (hold_target[static_cast<std::size_t>(o)] || !out.member[static_cast<std::size_t>(cp.initial_configs[static_cast<std::size_t>(o)])])
                continue;
            hold_target[static_cast<std::size_t>(o)] = true;
            Target t{cp.hold_var, voc.object[static_cast<std::size_t>(o)], false, -1, {}};
            for (std::size_t id = 0; id < tree.size(); ++id)
                record(t, tree[id], static_cast<int>(id));
            targets.push_back(std::move(t));
            added = true;
        }
        return added;
    };

    std::vector<Node> tree;
    IwHooks hooks;
    hooks.on_generate = [&](const std::vector<Node>& nodes, int id) {
        for (auto& t : targets)
            record(t, nodes[static_cast<std::size_t>(id)], id);
        return false;
    };
    hooks.on_layer = [&](const std::vector<Node>& nodes, int) {
        while (all_reached())
            if (!close(nodes))
                return true;
        return false;
    };
    const Result r = iw(relaxed, features, 2, cp.problem->initial_state(), [](const fs::State&) { return false; }, limits,
                        &tree, hooks);
    out.outcome = r.outcome;
    out.stats = r.stats;
    // Exhaustion or a budget leaves some targets open: settle with what the
    // tree holds.
    if (r.outcome != Outcome::Solved)
        while (close(tree)) {
        }
    out.unreachable = r.outcome == Outcome::Exhausted &&
                      std::any_of(targets.begin(), targets.end(), [](const Target& t) { return t.goal && t.depth < 0; });
    for (std::size_t c = 0; c < out.member.size(); ++c)
        if (out.member[c])
            out.configs.push_back(static_cast<int>(c));
    return out;
}

Algorithm parse_algorithm(const std::string& s)
{
    if (s == "iw")
        return Algorithm::Iw;
    if (s == "siw")
        return Algorithm::Siw;
    if (s == "bfws")
        return Algorithm::Bfws;
    throw std::invalid_argument("unknown algorithm '" + s + "'");
}

Counter parse_counter(const std::string& s)
{
    if (s == "c")
        return Counter::C;
    if (s == "m")
        return Counter::M;
    if (s == "g")
        return Counter::G;
    throw std::invalid_argument("unknown counter '" + s + "' (expected c, m or g)");
}

std::string to_string(Algorithm a)
{
    switch (a) {
    case Algorithm::Iw: return "iw";
    case Algorithm::Siw: return "siw";
    case Algorithm::Bfws: return "bfws";
    }
    return "?";
}

std::string to_string(Counter c)
{
    switch (c) {
    case Counter::C: return "c";
    case Counter::M: return "m";
    case Counter::G: return "g";
    }
    return "?";
}

PlanRun plan(const cmp::CompiledProblem& cp, const PlannerConfig& cfg)
{
    Clock clock;
    PlanRun run;
    const fs::GroundProblem& g = *cp.ground;
    const fs::State& init = cp.problem->initial_state();

    Limits prep = cfg.prep_limits;
    if (prep.time_budget < 0)
        prep.time_budget = cfg.limits.time_budget;
    const ObstructingSet obs = compute_obstructing_set(cp, prep);
    run.obstructing = obs.configs;
    const FeatureMap features = make_features(cp);
    run.c0 = heuristic_c(cp, obs.member, init);
    run.m0 = heuristic_m(cp, init);
    run.g0 = goal_count(g, init);
    run.prep_seconds = clock.seconds();

    const auto done = [&](std::string outcome) {
        run.outcome = std::move(outcome);
        run.total_seconds = clock.seconds();
        run.search_seconds = std::max(0.0, run.total_seconds - run.prep_seconds);
        return run;
    };
    if (obs.unreachable)
        return done("unsolvable");
    if (obs.outcome == Outcome::TimeBudget)
        return done("timeout");

    Limits limits = cfg.limits;
    if (limits.time_budget >= 0)
        limits.time_budget = std::max(0.0, limits.time_budget - run.prep_seconds);

    const auto run_bfws = [&](const Limits& l) {
        BfwsOptions opt;
        opt.prune_w3 = cfg.prune_w3;
        opt.limits = l;
        const std::vector<bool> member = obs.member;
        for (Counter c : cfg.order) {
            switch (c) {
            case Counter::C:
                opt.heuristics.push_back([&cp, member](const fs::State& s) { return heuristic_c(cp, member, s); });
                break;
            case Counter::M:
                opt.heuristics.push_back([&cp](const fs::State& s) { return heuristic_m(cp, s); });
                break;
            case Counter::G:
                opt.heuristics.push_back([&g](const fs::State& s) { return goal_count(g, s); });
                break;
            }
        }
        return static_cast<Result>(bfws(g, features, opt));
    };

    Result r;
    run.algorithm = cfg.algorithm;
    switch (cfg.algorithm) {
    case Algorithm::Iw:
        r = iw_driver(g, features, init, [&](const fs::State& s) { return g.is_goal(s); }, limits);
        break;
    case Algorithm::Siw:
        r = siw(g, features, limits);
        break;
    case Algorithm::Bfws:
        r = run_bfws(limits);
        break;
    }
    if (r.outcome == Outcome::Exhausted && cfg.algorithm != Algorithm::Bfws && cfg.fallback_bfws) {
        Limits rest = limits;
        if (rest.node_budget >= 0)
            rest.node_budget = std::max<long long>(0, rest.node_budget - r.stats.generated);
        if (rest.time_budget >= 0)
            rest.time_budget = std::max(0.0, rest.time_budget - r.stats.seconds);
        const Stats first = r.stats;
        r = run_bfws(rest);
        r.stats.expanded += first.expanded;
        r.stats.generated += first.generated;
        for (std::size_t i = 0; i < r.stats.novelty.size(); ++i)
            r.stats.novelty[i] += first.novelty[i];
        r.stats.seconds += first.seconds;
        run.algorithm = Algorithm::Bfws;
    }
    run.stats = r.stats;
    switch (r.outcome) {
    case Outcome::Solved:
        run.plan = r.plan;
        return done("solved");
    case Outcome::TimeBudget: return done("timeout");
    case Outcome::NodeBudget: return done("memory-out");
    case Outcome::Exhausted:
        // Only BFWS without pruning explores the whole reachable space.
        return done(run.algorithm == Algorithm::Bfws && !cfg.prune_w3 ? "unsolvable" : "failed");
    }
    return done("failed");
}

}  // namespace ctmp::search
