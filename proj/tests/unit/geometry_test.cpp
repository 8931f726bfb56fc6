#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "ctmp/geometry/geometry.hpp"
#include "ctmp/geometry/scene_io.hpp"
#include "ctmp/geometry/sweep.hpp"

using namespace ctmp::geo;

namespace {

Scene one_table()
{
    Scene s;
    s.tables = {{-0.6, 0.6, 0.2, 1.2}};
    s.validate();
    return s;
}

double dist3(const Vec3& a, const Vec3& b)
{
    return std::sqrt((a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y) + (a.z - b.z) * (a.z - b.z));
}

// Distance from p to the solid cylinder via its closest point.
double cylinder_distance(const Vec3& p, const Vec3& c, double radius, double half_height)
{
    double qx = p.x, qy = p.y;
    const double rx = p.x - c.x, ry = p.y - c.y;
    const double rr = std::hypot(rx, ry);
    if (rr > radius) {
        qx = c.x + rx / rr * radius;
        qy = c.y + ry / rr * radius;
    }
    const double qz = std::clamp(p.z, c.z - half_height, c.z + half_height);
    return dist3(p, {qx, qy, qz});
}

double dense_min_distance(const std::vector<Vec3>& wps, const Vec3& c, double radius, double half_height, double step)
{
    double best = 1e300;
    for (const Vec3& p : sweep_samples(wps, step))
        best = std::min(best, cylinder_distance(p, c, radius, half_height));
    return best;
}

ArmConf grasp_at(const Scene& s, double x, double y, double phi)
{
    const double r = s.robot.standoff;
    return {{x + r * std::cos(phi), y + r * std::sin(phi), s.object_z()}, phi + std::numbers::pi, false};
}

void check_near(const Vec3& a, const Vec3& b, double tol = 1e-12)
{
    CHECK(std::abs(a.x - b.x) <= tol);
    CHECK(std::abs(a.y - b.y) <= tol);
    CHECK(std::abs(a.z - b.z) <= tol);
}

}  // namespace

TEST_CASE("transform: fixed examples")
{
    check_near(transform({0, 0, 0}, {0.5, 0.2, 0.8}), {0.5, 0.2, 0.8});
    check_near(transform({1.0, 2.0, 0}, {0.5, 0.2, 0.8}), {1.5, 2.2, 0.8});
    check_near(transform({0, 0, std::numbers::pi / 2}, {1, 0, 0.8}), {0, 1, 0.8});
    check_near(inverse_transform({1, 2, 0}, {1.5, 2.2, 0.8}), {0.5, 0.2, 0.8});
    check_near(inverse_transform({0, 0, 0}, {-3, 4, 1}), {-3, 4, 1});
}

TEST_CASE("transform: round trip and rigidity over random poses")
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> pos(-5, 5), ang(-std::numbers::pi, std::numbers::pi), z(0, 2);
    double worst = 0;
    for (int i = 0; i < 1000; ++i) {
        const BasePose b = BasePose::make(pos(rng), pos(rng), ang(rng));
        const Vec3 c{pos(rng), pos(rng), z(rng)};
        const Vec3 d{pos(rng), pos(rng), z(rng)};
        worst = std::max(worst, dist3(inverse_transform(b, transform(b, c)), c));
        worst = std::max(worst, dist3(transform(b, inverse_transform(b, c)), c));
        CHECK(transform(b, c).z == c.z);
        CHECK(std::abs(dist3(transform(b, c), transform(b, d)) - dist3(c, d)) < 1e-9);
    }
    CHECK(worst < 1e-9);
}

TEST_CASE("wrap_angle lands in [-pi, pi)")
{
    for (double t : {0.0, 3.5, -3.5, 7.0, -7.0, std::numbers::pi, -std::numbers::pi, 100.0}) {
        const double w = wrap_angle(t);
        CHECK(w >= -std::numbers::pi);
        CHECK(w < std::numbers::pi);
        CHECK(std::abs(std::remainder(w - t, 2 * std::numbers::pi)) < 1e-9);
    }
    CHECK(wrap_angle(std::numbers::pi) == -std::numbers::pi);
}

TEST_CASE("within_any_table uses closed rectangles")
{
    const Scene s = one_table();
    CHECK(within_any_table(s, {0.0, 0.7, 0.76}));
    CHECK_FALSE(within_any_table(s, {0.0, 2.2, 0.76}));
    CHECK(within_any_table(s, {0.6, 0.2, 0.76}));
    CHECK(within_any_table(s, {-0.6, 1.2, 0.76}));
    CHECK_FALSE(within_any_table(s, {0.6 + 1e-12, 0.5, 0.76}));
}

TEST_CASE("virtual table covers every swept point")
{
    const Scene s = one_table();
    const double e = s.virtual_half_extent();
    CHECK(e >= 1.1 * s.robot.reach_max);
    CHECK(e >= s.robot.reach_max + s.robot.holding_radius + s.object.radius);
}

TEST_CASE("plan_arm_trajectories")
{
    const Scene s = one_table();
    SUBCASE("outside the annulus")
    {
        CHECK(plan_arm_trajectories(s, grasp_at(s, 0.1, 0.0, 0.0), 0).empty());
        CHECK(plan_arm_trajectories(s, grasp_at(s, 1.5, 0.0, 0.0), 0).empty());
    }
    SUBCASE("reachable target")
    {
        const ArmConf target = grasp_at(s, 0.6, 0.1, std::numbers::pi);
        const auto trajs = plan_arm_trajectories(s, target, 3);
        REQUIRE(!trajs.empty());
        CHECK(trajs.size() <= 4);
        for (const auto& t : trajs) {
            REQUIRE(t.waypoints.size() == 3);
            CHECK(t.waypoints.front() == s.rest_position());
            CHECK(t.waypoints.back() == target.position);
            CHECK(t.waypoints[1].z > target.position.z);
            for (const Vec3& p : sweep_samples(t.waypoints, s.sampling.sweep_step))
                CHECK(p.z - s.robot.gripper_radius > s.table_height);
        }
        const auto again = plan_arm_trajectories(s, target, 3);
        REQUIRE(again.size() == trajs.size());
        for (std::size_t i = 0; i < trajs.size(); ++i)
            CHECK(again[i].waypoints == trajs[i].waypoints);
        CHECK(plan_arm_trajectories(s, target, 4)[0].waypoints != trajs[0].waypoints);
    }
    SUBCASE("below the table surface")
    {
        ArmConf target = grasp_at(s, 0.6, 0.1, 0.0);
        target.position.z = s.table_height - 0.05;
        CHECK(plan_arm_trajectories(s, target, 0).empty());
    }
}

TEST_CASE("sweep_samples spacing")
{
    const std::vector<Vec3> wps{{0, 0, 0}, {0.1, 0, 0}, {0.1, 0.0, 0.055}};
    const auto pts = sweep_samples(wps, 0.01);
    CHECK(pts.front() == wps.front());
    CHECK(pts.back() == wps.back());
    CHECK(pts.size() == 10 + 6 + 1);
    for (std::size_t i = 0; i + 1 < pts.size(); ++i)
        CHECK(dist3(pts[i], pts[i + 1]) <= 0.01 + 1e-12);
}

TEST_CASE("trajectory_collides: simple cases")
{
    const Scene s = one_table();
    const ArmConf target = grasp_at(s, 0.6, 0.0, std::numbers::pi);
    const auto trajs = plan_arm_trajectories(s, target, 0);
    REQUIRE(!trajs.empty());
    const ArmTrajectory& t = trajs[0];

    for (const Vec3& w : t.waypoints) {
        CHECK(trajectory_collides(s, t, w, false));
        CHECK(trajectory_collides(s, t, w, true));
    }
    // The grasped object is not hit by the empty gripper, but the holding sweep covers it.
    const Vec3 object{0.6, 0.0, s.object_z()};
    CHECK_FALSE(trajectory_collides(s, t, object, false));
    CHECK(trajectory_collides(s, t, object, true));

    double bound = 0;
    for (const Vec3& w : t.waypoints)
        bound = std::max(bound, std::hypot(w.x, w.y));
    const double far = bound + s.robot.holding_radius + s.object.radius + 0.01;
    for (double a = 0; a < 6.28; a += 0.5)
        CHECK_FALSE(trajectory_collides(s, t, {far * std::cos(a), far * std::sin(a), s.object_z()}, true));
}

TEST_CASE("trajectory_collides agrees with a dense-sampling oracle")
{
    const Scene s = one_table();
    const double delta = s.sampling.sweep_step;
    const double hh = s.object.height / 2;
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0), ang(-std::numbers::pi, std::numbers::pi);
    int checked = 0, decided = 0;
    for (int i = 0; i < 80; ++i) {
        const double rad = 0.4 + 0.5 * (u(rng) + 1) / 2;
        const double a = ang(rng);
        const auto trajs = plan_arm_trajectories(s, grasp_at(s, rad * std::cos(a), rad * std::sin(a), ang(rng)), i);
        for (const auto& t : trajs) {
            for (int j = 0; j < 20; ++j) {
                const Vec3 c{t.waypoints[1].x + 0.3 * u(rng), t.waypoints[1].y + 0.3 * u(rng), s.object_z()};
                const double d = dense_min_distance(t.waypoints, c, s.object.radius, hh, delta / 100);
                for (bool holding : {false, true}) {
                    const double r = holding ? s.robot.holding_radius : s.robot.gripper_radius;
                    const bool hit = trajectory_collides(s, t, c, holding);
                    ++checked;
                    if (d <= r - delta) {
                        CHECK(hit);
                        ++decided;
                    } else if (d > r) {
                        CHECK_FALSE(hit);
                        ++decided;
                    }
                }
            }
        }
    }
    CHECK(checked > 1000);
    CHECK(decided > checked * 9 / 10);
}

TEST_CASE("trajectory_collides: reversal symmetry and radius monotonicity")
{
    const Scene s = one_table();
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 30; ++i) {
        const auto trajs = plan_arm_trajectories(s, grasp_at(s, 0.55 + 0.2 * u(rng), 0.3 * u(rng), 3.0 * u(rng)), i);
        for (const auto& t : trajs) {
            const ArmTrajectory r = t.reversed();
            CHECK(r.waypoints.front() == t.waypoints.back());
            for (int j = 0; j < 40; ++j) {
                const Vec3 c{0.6 * u(rng) + 0.3, 0.6 * u(rng), s.object_z()};
                for (bool holding : {false, true})
                    CHECK(trajectory_collides(s, t, c, holding) == trajectory_collides(s, r, c, holding));
                if (trajectory_collides(s, t, c, false))
                    CHECK(trajectory_collides(s, t, c, true));
            }
        }
    }
}

TEST_CASE("scan kernels are bit-equivalent")
{
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const SweepParams p{0.04 * 0.04, 0.03, 0.06};
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<Vec3> samples;
        const int ns = trial % 7 == 0 ? 0 : 1 + static_cast<int>(rng() % 60);
        for (int i = 0; i < ns; ++i)
            samples.push_back({0.3 * u(rng), 0.3 * u(rng), 0.8 + 0.1 * u(rng)});
        const std::size_t n = rng() % 37;
        std::vector<double> xs(n), ys(n), zs(n);
        for (std::size_t i = 0; i < n; ++i) {
            xs[i] = 0.35 * u(rng), ys[i] = 0.35 * u(rng), zs[i] = 0.76 + 0.05 * u(rng);
            // Exact boundary: the sample sits at distance r + r_o in x from the axis.
            if (ns > 0 && i % 5 == 0) {
                const Vec3& sp = samples[i % samples.size()];
                xs[i] = sp.x - (0.04 + 0.03), ys[i] = sp.y, zs[i] = sp.z;
            }
        }
        std::vector<std::uint8_t> a(n, 7), b(n, 7), c(n, 7);
        scan_scalar(samples, p, xs, ys, zs, a);
        scan(samples, p, xs, ys, zs, c);
        CHECK(a == c);
        if (avx2_available()) {
            scan_avx2(samples, p, xs, ys, zs, b);
            CHECK(a == b);
        }
    }
}

TEST_CASE("scene json")
{
    using nlohmann::json;
    const json j = {{"schema", kSceneSchema}, {"tables", {{-0.5, 0.5, 0.3, 1.0}}}, {"objects", 10}};
    const Scene s = scene_from_json(j);
    CHECK(s.tables.size() == 1);
    CHECK(s.sampling.virtual_configs == 15);

    const Scene back = scene_from_json(scene_to_json(s));
    CHECK(scene_to_json(back) == scene_to_json(s));
    CHECK(scene_hash(back) == scene_hash(s));

    json j40 = j;
    j40["objects"] = 40;
    CHECK(scene_hash(scene_from_json(j40)) == scene_hash(s));

    json moved = j;
    moved["tables"][0][0] = -0.49;
    CHECK(scene_hash(scene_from_json(moved)) != scene_hash(s));

    json bad = j;
    bad["colour"] = "red";
    CHECK_THROWS_AS(scene_from_json(bad), SceneError);
    bad = j;
    bad["schema"] = "other/1";
    CHECK_THROWS_AS(scene_from_json(bad), SceneError);
    bad = j;
    bad["robot"] = {{"holding_radius", 0.01}};
    CHECK_THROWS_AS(scene_from_json(bad), SceneError);
    bad = j;
    bad["robot"] = {{"standoff", 0.06}};  // 0.04 + 0.03 reaches the target
    CHECK_THROWS_AS(scene_from_json(bad), SceneError);
    bad = j;
    bad["robot"] = {{"holding_radius", 0.10}};  // below standoff + radius
    CHECK_THROWS_AS(scene_from_json(bad), SceneError);
    bad = j;
    bad["sampling"] = {{"D", 0}};
    CHECK_THROWS_AS(scene_from_json(bad), SceneError);
    bad = j;
    bad["tables"] = json::array();
    CHECK_THROWS_AS(scene_from_json(bad), SceneError);
    CHECK(hex64(0xabcULL) == "0000000000000abc");
}
