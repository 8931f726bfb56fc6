#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <numeric>

#include <absl/container/flat_hash_map.h>

#include "ctmp/geometry/scene_io.hpp"
#include "ctmp/geometry/sweep.hpp"
#include "ctmp/precompile/tables.hpp"

namespace ctmp::pre {

using geo::Table;
using geo::Vec3;

void OverlapTable::reset(std::size_t rows, std::size_t cols)
{
    rows_ = rows;
    cols_ = cols;
    words_ = (cols + 63) / 64;
    bits_.assign(rows_ * words_, 0);
}

std::size_t OverlapTable::count() const
{
    std::size_t n = 0;
    for (std::uint64_t w : bits_)
        n += static_cast<std::size_t>(std::popcount(w));
    return n;
}

std::vector<int> OverlapTable::row(std::size_t r) const
{
    std::vector<int> out;
    for (std::size_t c = 0; c < cols_; ++c)
        if (test(r, c))
            out.push_back(static_cast<int>(c));
    return out;
}

std::pair<std::int64_t, std::int64_t> grid_key(double x, double y, double step)
{
    return {std::llround(x / step), std::llround(y / step)};
}

int Tables::proc_pose(int b, int node) const
{
    if (b < 0 || b >= n_bases() || node < 0 || node >= n_arm())
        throw BuildError("pose lookup with unknown base or arm id");
    return pose[static_cast<std::size_t>(b) * arm.nodes.size() + static_cast<std::size_t>(node)];
}

int Tables::relative_id(int b, int real) const
{
    if (b < 0 || b >= n_bases() || real < 0 || real >= n_real())
        return -1;
    return relative_of[static_cast<std::size_t>(b) * real_configs.size() + static_cast<std::size_t>(real)];
}

bool Tables::proc_nonoverlap(int b, int traj, int real, bool holding_object) const
{
    if (traj < 0 || traj >= static_cast<int>(arm.edges.size()))
        return true;
    const int rel = relative_id(b, real);
    if (rel < 0)
        return true;
    const OverlapTable& table = holding_object ? holding : empty;
    return !table.test(static_cast<std::size_t>(traj), static_cast<std::size_t>(rel));
}

Summary summarize(const Tables& t)
{
    return {static_cast<int>(t.arm.edges.size()),
            t.n_arm(),
            t.n_bases(),
            static_cast<int>(t.virtual_configs.size()),
            t.arm.grasp_nodes(),
            static_cast<int>(t.relative_configs.size()),
            t.n_real(),
            t.scans,
            t.build_seconds};
}

std::vector<ObjectConfig> build_virtual_configs(const Scene& scene)
{
    const int d = scene.sampling.virtual_configs;
    int rows = 1;
    for (int r = 1; r * r <= d; ++r)
        if (d % r == 0)
            rows = r;
    const int cols = d / rows;
    const double e = scene.virtual_half_extent();
    std::vector<ObjectConfig> out;
    out.reserve(static_cast<std::size_t>(d));
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j)
            out.push_back({-e + (j + 0.5) * 2 * e / cols, -e + (i + 0.5) * 2 * e / rows, scene.object_z()});
    return out;
}

std::vector<ArmConf> build_grasp_poses(const Scene& scene, const ObjectConfig& v)
{
    const int k = scene.sampling.grasps_per_config;
    const double s = scene.robot.standoff;
    std::vector<ArmConf> out;
    for (int j = 0; j < k; ++j) {
        const double phi = 2 * std::numbers::pi * j / k;
        out.push_back({{v.x + s * std::cos(phi), v.y + s * std::sin(phi), v.z}, geo::wrap_angle(phi + std::numbers::pi),
                       false});
    }
    return out;
}

ArmGraph build_arm_graph(const Scene& scene, std::vector<ObjectConfig>& virtual_configs)
{
    ArmGraph g;
    g.nodes.push_back({scene.rest_position(), 0.0, true});
    g.vplace.push_back(-1);

    std::vector<ObjectConfig> kept;
    const int k = scene.sampling.grasps_per_config;
    for (std::size_t v = 0; v < virtual_configs.size(); ++v) {
        const auto poses = build_grasp_poses(scene, virtual_configs[v]);
        bool any = false;
        for (int j = 0; j < k; ++j) {
            const std::uint64_t stream = v * static_cast<std::uint64_t>(k) + static_cast<std::uint64_t>(j);
            auto trajs = geo::plan_arm_trajectories(scene, poses[static_cast<std::size_t>(j)], stream);
            if (trajs.empty())
                continue;
            any = true;
            const int node = static_cast<int>(g.nodes.size());
            g.nodes.push_back(poses[static_cast<std::size_t>(j)]);
            g.vplace.push_back(static_cast<int>(kept.size()));
            for (auto& t : trajs) {
                t.source = 0;
                t.target = node;
                t.id = static_cast<int>(g.edges.size());
                ArmTrajectory r = t.reversed();
                r.id = t.id + 1;
                g.edges.push_back(std::move(t));
                g.edges.push_back(std::move(r));
            }
        }
        if (any)
            kept.push_back(virtual_configs[v]);
    }
    if (kept.empty())
        throw BuildError("no virtual configuration has a reachable grasp pose");
    virtual_configs = std::move(kept);
    return g;
}

namespace {

double rect_distance(const Table& t, double x, double y)
{
    const double dx = std::max({t.x_min - x, 0.0, x - t.x_max});
    const double dy = std::max({t.y_min - y, 0.0, y - t.y_max});
    return std::hypot(dx, dy);
}

// Liang-Barsky clip of the segment against the closed rectangle.
bool segment_hits_rect(const Table& t, double x0, double y0, double x1, double y1)
{
    double lo = 0, hi = 1;
    const double dx = x1 - x0, dy = y1 - y0;
    const double p[4] = {-dx, dx, -dy, dy};
    const double q[4] = {x0 - t.x_min, t.x_max - x0, y0 - t.y_min, t.y_max - y0};
    for (int i = 0; i < 4; ++i) {
        if (p[i] == 0) {
            if (q[i] < 0)
                return false;
            continue;
        }
        const double r = q[i] / p[i];
        if (p[i] < 0)
            lo = std::max(lo, r);
        else
            hi = std::min(hi, r);
        if (lo > hi)
            return false;
    }
    return true;
}

struct PointBits {
    std::uint64_t x, y, z;
    bool operator==(const PointBits&) const = default;
    template <typename H>
    friend H AbslHashValue(H h, const PointBits& b)
    {
        return H::combine(std::move(h), b.x, b.y, b.z);
    }
};

int find(std::vector<int>& parent, int x)
{
    while (parent[static_cast<std::size_t>(x)] != x)
        x = parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
    return x;
}

}  // namespace

BaseGraph build_base_graph(const Scene& scene)
{
    const auto& sp = scene.sampling;
    geo::SplitMix rng(sp.seed ^ 0x5bd1e995b5e1a4d7ULL);

    std::vector<double> perimeter;
    for (const Table& t : scene.tables)
        perimeter.push_back(2 * ((t.x_max - t.x_min) + (t.y_max - t.y_min)));
    const double total = std::accumulate(perimeter.begin(), perimeter.end(), 0.0);
    if (total <= 0)
        throw BuildError("tables have no perimeter to place bases around");

    BaseGraph g;
    const long max_attempts = 1000L * sp.bases;
    for (long attempt = 0; attempt < max_attempts && static_cast<int>(g.nodes.size()) < sp.bases; ++attempt) {
        double u = rng.uniform() * total;
        std::size_t ti = 0;
        while (ti + 1 < perimeter.size() && u >= perimeter[ti])
            u -= perimeter[ti++];
        const Table& t = scene.tables[ti];
        const double w = t.x_max - t.x_min, h = t.y_max - t.y_min;
        double ex, ey, nx, ny;
        if (u < w)
            ex = t.x_min + u, ey = t.y_min, nx = 0, ny = -1;
        else if (u < w + h)
            ex = t.x_max, ey = t.y_min + (u - w), nx = 1, ny = 0;
        else if (u < 2 * w + h)
            ex = t.x_max - (u - w - h), ey = t.y_max, nx = 0, ny = 1;
        else
            ex = t.x_min, ey = t.y_max - (u - 2 * w - h), nx = -1, ny = 0;
        const double d = sp.base_band_min + rng.uniform() * (sp.base_band_max - sp.base_band_min);
        const double x = ex + d * nx, y = ey + d * ny;
        const bool clear = std::all_of(scene.tables.begin(), scene.tables.end(),
                                       [&](const Table& o) { return rect_distance(o, x, y) >= sp.base_band_min; });
        if (!clear)
            continue;
        g.nodes.push_back(BasePose::make(x, y, std::atan2(-ny, -nx)));
    }
    if (g.nodes.empty())
        throw BuildError("no base pose could be sampled around the tables");

    const int n = static_cast<int>(g.nodes.size());
    struct Pair {
        double dist;
        int a, b;
    };
    std::vector<Pair> pairs;
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b)
            pairs.push_back({std::hypot(g.nodes[a].x - g.nodes[b].x, g.nodes[a].y - g.nodes[b].y), a, b});
    std::sort(pairs.begin(), pairs.end(),
              [](const Pair& l, const Pair& r) { return std::tie(l.dist, l.a, l.b) < std::tie(r.dist, r.a, r.b); });

    std::vector<int> degree(static_cast<std::size_t>(n), 0);
    std::vector<int> parent(static_cast<std::size_t>(n));
    std::iota(parent.begin(), parent.end(), 0);
    for (const Pair& p : pairs) {
        if (degree[p.a] >= sp.base_neighbors || degree[p.b] >= sp.base_neighbors)
            continue;
        const BasePose &a = g.nodes[p.a], &b = g.nodes[p.b];
        const bool crosses = std::any_of(scene.tables.begin(), scene.tables.end(),
                                         [&](const Table& t) { return segment_hits_rect(t, a.x, a.y, b.x, b.y); });
        if (crosses)
            continue;
        ++degree[p.a], ++degree[p.b];
        g.edges.push_back({p.a, p.b});
        g.edges.push_back({p.b, p.a});
        parent[find(parent, p.a)] = find(parent, p.b);
    }
    std::sort(g.edges.begin(), g.edges.end());

    std::vector<int> smallest(static_cast<std::size_t>(n), n);
    for (int i = 0; i < n; ++i) {
        int& s = smallest[find(parent, i)];
        s = std::min(s, i);
    }
    for (int i = 0; i < n; ++i)
        g.component.push_back(smallest[find(parent, i)]);
    return g;
}

void build_real_configs(Tables& t)
{
    const double q = t.scene.sampling.quantization;
    absl::flat_hash_map<std::pair<std::int64_t, std::int64_t>, int> index;
    auto intern = [&](const ObjectConfig& world) -> int {
        const auto key = grid_key(world.x, world.y, q);
        const ObjectConfig snapped{key.first * q, key.second * q, world.z};
        if (!geo::within_any_table(t.scene, world) || !geo::within_any_table(t.scene, snapped))
            return -1;
        auto [it, inserted] = index.try_emplace(key, static_cast<int>(t.real_configs.size()));
        if (inserted)
            t.real_configs.push_back(snapped);
        return it->second;
    };

    for (const BasePose& b : t.base.nodes)
        for (const ObjectConfig& c : t.virtual_configs)
            intern(geo::transform(b, c));
    if (t.real_configs.empty())
        throw BuildError("no virtual configuration lands on a table from any base");

    const std::size_t na = t.arm.nodes.size();
    t.pose.assign(t.base.nodes.size() * na, -1);
    for (std::size_t b = 0; b < t.base.nodes.size(); ++b)
        for (std::size_t a = 1; a < na; ++a) {
            const ObjectConfig& v = t.virtual_configs[static_cast<std::size_t>(t.arm.vplace[a])];
            const ObjectConfig w = geo::transform(t.base.nodes[b], v);
            const auto key = grid_key(w.x, w.y, q);
            auto it = index.find(key);
            if (it != index.end() && geo::within_any_table(t.scene, w))
                t.pose[b * na + a] = it->second;
        }
}

void build_relative_configs(Tables& t)
{
    absl::flat_hash_map<PointBits, int> index;
    const std::size_t nr = t.real_configs.size();
    t.relative_of.assign(t.base.nodes.size() * nr, -1);
    for (std::size_t b = 0; b < t.base.nodes.size(); ++b)
        for (std::size_t r = 0; r < nr; ++r) {
            const ObjectConfig local = geo::inverse_transform(t.base.nodes[b], t.real_configs[r]);
            if (!geo::within_virtual_table(t.scene, local))
                continue;
            const PointBits key{std::bit_cast<std::uint64_t>(local.x), std::bit_cast<std::uint64_t>(local.y),
                           std::bit_cast<std::uint64_t>(local.z)};
            auto [it, inserted] = index.try_emplace(key, static_cast<int>(t.relative_configs.size()));
            if (inserted)
                t.relative_configs.push_back(local);
            t.relative_of[b * nr + r] = it->second;
        }
}

void build_overlap_tables(Tables& t)
{
    const std::size_t nt = t.arm.edges.size(), nc = t.relative_configs.size();
    t.holding.reset(nt, nc);
    t.empty.reset(nt, nc);
    std::vector<double> xs(nc), ys(nc), zs(nc);
    for (std::size_t i = 0; i < nc; ++i)
        xs[i] = t.relative_configs[i].x, ys[i] = t.relative_configs[i].y, zs[i] = t.relative_configs[i].z;
    std::vector<std::uint8_t> hits(nc);
    for (std::size_t e = 0; e < nt; ++e) {
        const auto samples = geo::sweep_samples(t.arm.edges[e].waypoints, t.scene.sampling.sweep_step);
        for (bool holding : {false, true}) {
            geo::scan(samples, geo::sweep_params(t.scene, holding), xs, ys, zs, hits);
            ++t.scans;
            OverlapTable& table = holding ? t.holding : t.empty;
            for (std::size_t c = 0; c < nc; ++c)
                if (hits[c])
                    table.set(e, c);
        }
    }
}

Tables precompile(const Scene& scene)
{
    const auto start = std::chrono::steady_clock::now();
    scene.validate();
    Tables t;
    t.scene = scene;
    t.scene_hash = geo::scene_hash(scene);
    t.virtual_configs = build_virtual_configs(scene);
    t.virtual_sampled = static_cast<int>(t.virtual_configs.size());
    t.arm = build_arm_graph(scene, t.virtual_configs);
    t.base = build_base_graph(scene);
    build_real_configs(t);
    build_relative_configs(t);
    build_overlap_tables(t);
    t.build_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return t;
}

}  // namespace ctmp::pre
