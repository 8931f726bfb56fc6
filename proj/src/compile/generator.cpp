#include "ctmp/compile/generator.hpp"

#include <algorithm>
#include <cmath>

#include "ctmp/geometry/scene_io.hpp"

namespace ctmp::cmp {

std::vector<int> reachable_configs(const pre::Tables& t, int base)
{
    std::vector<bool> ok(static_cast<std::size_t>(t.n_real()), false);
    const int comp = t.base.component[static_cast<std::size_t>(base)];
    for (int b = 0; b < t.n_bases(); ++b) {
        if (t.base.component[static_cast<std::size_t>(b)] != comp)
            continue;
        for (int a = 1; a < t.n_arm(); ++a)
            if (int c = t.proc_pose(b, a); c >= 0)
                ok[static_cast<std::size_t>(c)] = true;
    }
    std::vector<int> out;
    for (int c = 0; c < t.n_real(); ++c)
        if (ok[static_cast<std::size_t>(c)])
            out.push_back(c);
    return out;
}

namespace {

// Draws `n` configs from `pool` (removing them) keeping each at least
// `min_gap` from `occupied` and from one another.
std::vector<int> draw(const pre::Tables& t, std::vector<int>& pool, std::vector<int>& occupied, int n, double min_gap,
                      geo::SplitMix& rng)
{
    std::vector<int> out;
    for (int i = 0; i < n; ++i) {
        std::vector<int> fits;
        for (int c : pool) {
            const auto& p = t.real_configs[static_cast<std::size_t>(c)];
            const bool clear = std::all_of(occupied.begin(), occupied.end(), [&](int o) {
                const auto& q = t.real_configs[static_cast<std::size_t>(o)];
                return std::hypot(p.x - q.x, p.y - q.y) >= min_gap;
            });
            if (clear)
                fits.push_back(c);
        }
        if (fits.empty())
            throw InstanceError("not enough free reachable configurations for the requested objects and goals");
        const int c = fits[static_cast<std::size_t>(rng.next() % fits.size())];
        out.push_back(c);
        occupied.push_back(c);
        pool.erase(std::find(pool.begin(), pool.end(), c));
    }
    return out;
}

// Arm trajectory leaving the resting configuration toward each arm node.
std::vector<int> approach_trajectories(const pre::Tables& t)
{
    std::vector<int> out(static_cast<std::size_t>(t.n_arm()), -1);
    for (std::size_t e = 0; e < t.arm.edges.size(); ++e)
        if (t.arm.edges[e].source == 0)
            out[static_cast<std::size_t>(t.arm.edges[e].target)] = static_cast<int>(e);
    return out;
}

// Some (base, arm) reaching `config` from the component of `base0` whose
// approach is clear of every config in `others`, with and without a held
// object.
bool clear_approach(const pre::Tables& t, const std::vector<int>& approach, int base0, int config,
                    const std::vector<int>& others)
{
    const int comp = t.base.component[static_cast<std::size_t>(base0)];
    for (int b = 0; b < t.n_bases(); ++b) {
        if (t.base.component[static_cast<std::size_t>(b)] != comp)
            continue;
        for (int a = 1; a < t.n_arm(); ++a) {
            if (t.proc_pose(b, a) != config)
                continue;
            const int tr = approach[static_cast<std::size_t>(a)];
            const bool clear = std::all_of(others.begin(), others.end(), [&](int q) {
                return t.proc_nonoverlap(b, tr, q, false) && t.proc_nonoverlap(b, tr, q, true);
            });
            if (clear)
                return true;
        }
    }
    return false;
}

}  // namespace

bool passes_clearance_check(const pre::Tables& t, const Instance& inst)
{
    const std::vector<int> approach = approach_trajectories(t);
    std::vector<int> left;  // object indices still in place
    for (std::size_t i = 0; i < inst.objects.size(); ++i)
        left.push_back(static_cast<int>(i));
    const auto config_of = [&](int i) { return *inst.objects[static_cast<std::size_t>(i)].initial.config; };
    for (bool changed = true; changed;) {
        changed = false;
        for (std::size_t k = 0; k < left.size(); ++k) {
            std::vector<int> others;
            for (int j : left)
                if (j != left[k])
                    others.push_back(config_of(j));
            if (clear_approach(t, approach, inst.initial_base, config_of(left[k]), others)) {
                left.erase(left.begin() + static_cast<long>(k));
                changed = true;
                break;
            }
        }
    }
    std::vector<int> stuck;
    for (int j : left)
        stuck.push_back(config_of(j));
    for (const auto& g : inst.goals) {
        const auto it = std::find_if(inst.objects.begin(), inst.objects.end(),
                                     [&](const ObjectSpec& o) { return o.name == g.object; });
        const int idx = static_cast<int>(it - inst.objects.begin());
        if (std::find(left.begin(), left.end(), idx) != left.end())
            return false;
        if (!clear_approach(t, approach, inst.initial_base, *g.target.config, stuck))
            return false;
    }
    return true;
}

Instance generate_instance(const pre::Tables& t, const GenOptions& opt)
{
    if (opt.attempts < 1)
        throw InstanceError("need at least one generation attempt");
    geo::SplitMix rng(opt.seed * 0x2545f4914f6cdd1dULL + 17);
    for (int attempt = 1;; ++attempt) {
        Instance inst = generate_once(t, opt, rng);
        if (!opt.require_clearance || passes_clearance_check(t, inst))
            return inst;
        if (attempt == opt.attempts)
            throw InstanceError("no instance passed the clearance check in " + std::to_string(opt.attempts) +
                                " attempts");
    }
}

Instance generate_once(const pre::Tables& t, const GenOptions& opt, geo::SplitMix& rng)
{
    if (opt.objects < 0 || opt.goals < 0 || opt.goals > opt.objects)
        throw InstanceError("need 0 <= goals <= objects");
    if (opt.initial_base < 0 || opt.initial_base >= t.n_bases())
        throw InstanceError("initial base does not exist");
    std::vector<int> pool = reachable_configs(t, opt.initial_base);
    const double gap = 2 * t.scene.object.radius;

    Instance inst;
    inst.scene_hash = geo::hex64(t.scene_hash);
    inst.initial_base = opt.initial_base;
    std::vector<int> occupied;
    const auto initial = draw(t, pool, occupied, opt.objects, gap, rng);
    for (int i = 0; i < opt.objects; ++i)
        inst.objects.push_back({"o" + std::to_string(i), {initial[static_cast<std::size_t>(i)], std::nullopt}});
    // Goal configs keep clear of initial placements too, so no goal is met
    // in the initial state.
    const auto goal = draw(t, pool, occupied, opt.goals, gap, rng);
    for (int i = 0; i < opt.goals; ++i)
        inst.goals.push_back({"o" + std::to_string(i), {goal[static_cast<std::size_t>(i)], std::nullopt}});
    return inst;
}

}  // namespace ctmp::cmp
