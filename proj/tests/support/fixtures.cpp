#include "fixtures.hpp"

#include <cmath>
#include <map>
#include <random>
#include <set>

#include "ctmp/geometry/scene_io.hpp"
#include "ctmp/search/novelty.hpp"

namespace fixtures {

std::shared_ptr<const pre::Tables> tables(const std::string& scene_file)
{
    return std::make_shared<const pre::Tables>(
        pre::precompile(geo::load_scene(std::string(CTMP_DATA_DIR) + "/scenes/" + scene_file)));
}

std::shared_ptr<const pre::Tables> one_table()
{
    static auto t = tables("one_table.json");
    return t;
}

std::shared_ptr<const pre::Tables> micro()
{
    static auto t = tables("micro.json");
    return t;
}

cmp::Plan named(const cmp::CompiledProblem& cp, const std::vector<int>& actions)
{
    cmp::Plan p;
    for (int a : actions)
        p.actions.push_back(cp.ground->actions()[static_cast<std::size_t>(a)].name);
    return p;
}

fs::State holding(const cmp::CompiledProblem& cp, fs::State s, int o)
{
    s.set(static_cast<std::size_t>(cp.hold_var), cp.vocab->object[static_cast<std::size_t>(o)]);
    s.set(static_cast<std::size_t>(cp.conf_var[static_cast<std::size_t>(o)]), cp.vocab->held);
    return s;
}

fs::State placed(const cmp::CompiledProblem& cp, fs::State s, int o, int config)
{
    if (s[static_cast<std::size_t>(cp.hold_var)] == cp.vocab->object[static_cast<std::size_t>(o)])
        s.set(static_cast<std::size_t>(cp.hold_var), cp.vocab->none);
    s.set(static_cast<std::size_t>(cp.conf_var[static_cast<std::size_t>(o)]), cp.vocab->conf[static_cast<std::size_t>(config)]);
    return s;
}

int novelty_oracle_mismatches(int sequences, unsigned seed)
{
    std::mt19937 rng(seed);
    int mismatches = 0;
    for (int q = 0; q < sequences; ++q) {
        const int vars = 1 + static_cast<int>(rng() % 6);
        const int values = 1 + static_cast<int>(rng() % 8);
        const int arity = 1 + static_cast<int>(rng() % 2);
        const bool partitioned = rng() % 2;
        const int length = 1 + static_cast<int>(rng() % 60);
        ctmp::search::NoveltyTable table(vars * values, arity);
        std::map<std::vector<int>, std::set<std::vector<int>>> seen;  // partition -> tuples
        for (int i = 0; i < length; ++i) {
            std::vector<int> atoms;
            for (int v = 0; v < vars; ++v)
                atoms.push_back(v * values + static_cast<int>(rng() % static_cast<unsigned>(values)));
            std::vector<int> key;
            if (partitioned)
                key = {static_cast<int>(rng() % 3), static_cast<int>(rng() % 2)};
            auto& tuples = seen[key];
            // Smallest tuple size made true for the first time.
            int expected = arity + 1;
            for (int size = arity; size >= 1; --size) {
                bool fresh = false;
                for (int a = 0; a < vars; ++a) {
                    if (size == 1) {
                        fresh |= !tuples.contains({atoms[static_cast<std::size_t>(a)]});
                        continue;
                    }
                    for (int b = a + 1; b < vars; ++b)
                        fresh |= !tuples.contains({atoms[static_cast<std::size_t>(a)], atoms[static_cast<std::size_t>(b)]});
                }
                if (fresh)
                    expected = size;
            }
            for (int a = 0; a < vars; ++a) {
                tuples.insert({atoms[static_cast<std::size_t>(a)]});
                if (arity == 2)
                    for (int b = a + 1; b < vars; ++b)
                        tuples.insert({atoms[static_cast<std::size_t>(a)], atoms[static_cast<std::size_t>(b)]});
            }
            mismatches += table.evaluate(atoms, key) != expected;
        }
    }
    return mismatches;
}

std::vector<std::pair<int, int>> approaches(const pre::Tables& t, int config)
{
    std::vector<std::pair<int, int>> out;
    for (int b = 0; b < t.n_bases(); ++b)
        for (int a = 1; a < t.n_arm(); ++a)
            if (t.proc_pose(b, a) == config)
                for (std::size_t e = 0; e < t.arm.edges.size(); ++e)
                    if (t.arm.edges[e].source == 0 && t.arm.edges[e].target == a)
                        out.emplace_back(b, static_cast<int>(e));
    return out;
}

namespace {

int reverse_of(const pre::Tables& t, int traj)
{
    const auto& e = t.arm.edges[static_cast<std::size_t>(traj)];
    for (std::size_t r = 0; r < t.arm.edges.size(); ++r)
        if (t.arm.edges[r].source == e.target && t.arm.edges[r].target == e.source)
            return static_cast<int>(r);
    return -1;
}

bool far_enough(const pre::Tables& t, const std::vector<int>& configs)
{
    for (std::size_t i = 0; i < configs.size(); ++i)
        for (std::size_t j = i + 1; j < configs.size(); ++j) {
            const auto& a = t.real_configs[static_cast<std::size_t>(configs[i])];
            const auto& b = t.real_configs[static_cast<std::size_t>(configs[j])];
            if (configs[i] == configs[j] || std::hypot(a.x - b.x, a.y - b.y) < 2 * t.scene.object.radius)
                return false;
        }
    return true;
}

std::vector<std::vector<int>> clear_tuples(const pre::Tables& t, int size, int want)
{
    std::vector<std::vector<int>> out;
    std::vector<int> cur;
    const auto rec = [&](auto&& self, int from) -> void {
        if (static_cast<int>(out.size()) >= want)
            return;
        if (static_cast<int>(cur.size()) == size) {
            if (mutually_clear(t, cur))
                out.push_back(cur);
            return;
        }
        for (int c = from; c < t.n_real(); ++c) {
            cur.push_back(c);
            if (far_enough(t, cur) && mutually_clear(t, cur))
                self(self, 0);
            cur.pop_back();
        }
    };
    rec(rec, 0);
    return out;
}

}  // namespace

bool mutually_clear(const pre::Tables& t, const std::vector<int>& configs)
{
    for (int c : configs) {
        if (approaches(t, c).empty())
            return false;
        for (const auto& [b, traj] : approaches(t, c))
            for (int tr : {traj, reverse_of(t, traj)})
                for (int other : configs)
                    if (other != c && (!t.proc_nonoverlap(b, tr, other, false) || !t.proc_nonoverlap(b, tr, other, true)))
                        return false;
    }
    return true;
}

namespace {

cmp::Instance two_objects(const pre::Tables& t, int i0, int i1, int g0, int g1)
{
    cmp::Instance inst;
    inst.scene_hash = geo::hex64(t.scene_hash);
    inst.initial_base = 0;
    inst.objects = {{"o0", {i0, std::nullopt}}, {"o1", {i1, std::nullopt}}};
    inst.goals = {{"o0", {g0, std::nullopt}}, {"o1", {g1, std::nullopt}}};
    return inst;
}

}  // namespace

cmp::Instance uncluttered_pair(const pre::Tables& t, int skip)
{
    const auto found = clear_tuples(t, 4, skip + 1);
    if (static_cast<int>(found.size()) <= skip)
        throw std::runtime_error("no uncluttered pair in this scene");
    const auto& c = found[static_cast<std::size_t>(skip)];
    return two_objects(t, c[0], c[1], c[2], c[3]);
}

cmp::Instance swap_pair(const pre::Tables& t, int skip)
{
    const auto found = clear_tuples(t, 2, skip + 1);
    if (static_cast<int>(found.size()) <= skip)
        throw std::runtime_error("no swappable pair in this scene");
    const auto& c = found[static_cast<std::size_t>(skip)];
    return two_objects(t, c[0], c[1], c[1], c[0]);
}

std::optional<Blocked> blocked_goal(const pre::Tables& t)
{
    for (int target = 0; target < t.n_real(); ++target) {
        const auto in = approaches(t, target);
        if (in.empty())
            continue;
        for (int blocker = 0; blocker < t.n_real(); ++blocker) {
            if (!far_enough(t, {target, blocker}))
                continue;
            bool all_blocked = true;
            for (const auto& [b, traj] : in)
                all_blocked &= !t.proc_nonoverlap(b, traj, blocker, false) || !t.proc_nonoverlap(b, traj, blocker, true);
            if (!all_blocked)
                continue;
            // The blocker can be picked up past the goal object, and the goal
            // is clear of both.
            bool blocker_free = false;
            for (const auto& [b, traj] : approaches(t, blocker))
                blocker_free |= t.proc_nonoverlap(b, traj, target, false) && t.proc_nonoverlap(b, traj, target, true);
            if (!blocker_free)
                continue;
            for (int goal = 0; goal < t.n_real(); ++goal) {
                if (!far_enough(t, {target, blocker, goal}) || !mutually_clear(t, {goal, blocker}) ||
                    !mutually_clear(t, {goal, target}))
                    continue;
                Blocked out;
                out.instance.scene_hash = geo::hex64(t.scene_hash);
                out.instance.objects = {{"o0", {target, std::nullopt}}, {"o1", {blocker, std::nullopt}}};
                out.instance.goals = {{"o0", {goal, std::nullopt}}};
                out.approaches = in;
                return out;
            }
        }
    }
    return std::nullopt;
}

}  // namespace fixtures
