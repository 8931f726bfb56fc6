#include "ctmp/geometry/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "ctmp/geometry/sweep.hpp"

namespace ctmp::geo {

double wrap_angle(double theta)
{
    constexpr double two_pi = 2 * std::numbers::pi;
    double t = std::fmod(theta + std::numbers::pi, two_pi);
    if (t < 0)
        t += two_pi;
    t -= std::numbers::pi;
    return t >= std::numbers::pi ? -std::numbers::pi : t;
}

ArmTrajectory ArmTrajectory::reversed() const
{
    ArmTrajectory r{-1, target, source, waypoints};
    std::reverse(r.waypoints.begin(), r.waypoints.end());
    return r;
}

void Scene::validate() const
{
    auto require = [](bool ok, const char* what) {
        if (!ok)
            throw SceneError(what);
    };
    require(!tables.empty(), "scene has no tables");
    for (const Table& t : tables)
        require(t.x_min <= t.x_max && t.y_min <= t.y_max, "table rectangle has negative extent");
    require(object.radius > 0 && object.height > 0, "object radius and height must be positive");
    require(robot.gripper_radius > 0 && robot.holding_radius > 0, "sweep radii must be positive");
    require(robot.holding_radius >= robot.gripper_radius, "holding radius must be at least the gripper radius");
    require(robot.reach_min >= 0 && robot.reach_min < robot.reach_max, "workspace annulus is empty");
    require(robot.standoff > 0, "grasp standoff must be positive");
    // The empty hand must miss its own target; the loaded sweep must cover
    // the carried object.
    require(robot.gripper_radius + object.radius < robot.standoff, "gripper sweep reaches the grasped object");
    require(robot.holding_radius >= robot.standoff + object.radius, "holding sweep does not cover the held object");
    require(robot.lift_min >= 0 && robot.lift_min <= robot.lift_max, "lift range is empty");
    require(robot.retreat_max >= 0, "retreat offset must be non-negative");
    require(std::hypot(robot.rest.x, robot.rest.y) <= robot.reach_max, "resting pose outside the arm reach");
    require(robot.rest.z >= robot.gripper_radius, "resting pose inside the table slab");
    require(sampling.virtual_configs >= 1 && sampling.grasps_per_config >= 1 && sampling.trajectories_per_grasp >= 1 &&
                sampling.bases >= 1 && sampling.base_neighbors >= 1,
            "sampling counts must be at least 1");
    require(sampling.sweep_step > 0, "sweep step must be positive");
    require(sampling.quantization > 0, "quantization step must be positive");
    require(sampling.snap_distance >= 0, "snap distance must be non-negative");
    require(sampling.base_band_min >= 0 && sampling.base_band_min <= sampling.base_band_max, "base band is empty");
}

double Scene::virtual_half_extent() const
{
    // The small slack keeps points just outside the square strictly out of
    // reach after rounding.
    const double reach = robot.reach_max;
    return std::max(1.1 * reach, reach + robot.holding_radius + object.radius + 1e-6);
}

ObjectConfig transform(const BasePose& base, const ObjectConfig& local)
{
    const double c = std::cos(base.theta), s = std::sin(base.theta);
    return {base.x + local.x * c - local.y * s, base.y + local.x * s + local.y * c, local.z};
}

ObjectConfig inverse_transform(const BasePose& base, const ObjectConfig& world)
{
    const double c = std::cos(base.theta), s = std::sin(base.theta);
    const double dx = world.x - base.x, dy = world.y - base.y;
    return {dx * c + dy * s, -dx * s + dy * c, world.z};
}

bool within_any_table(const Scene& scene, const ObjectConfig& p)
{
    return std::any_of(scene.tables.begin(), scene.tables.end(), [&](const Table& t) {
        return p.x >= t.x_min && p.x <= t.x_max && p.y >= t.y_min && p.y <= t.y_max;
    });
}

bool within_virtual_table(const Scene& scene, const ObjectConfig& local)
{
    const double e = scene.virtual_half_extent();
    return std::abs(local.x) <= e && std::abs(local.y) <= e;
}

std::vector<Vec3> sweep_samples(std::span<const Vec3> waypoints, double step)
{
    std::vector<Vec3> out;
    if (waypoints.empty())
        return out;
    for (std::size_t i = 0; i + 1 < waypoints.size(); ++i) {
        const Vec3& p = waypoints[i];
        const Vec3& q = waypoints[i + 1];
        const double len = std::sqrt((q.x - p.x) * (q.x - p.x) + (q.y - p.y) * (q.y - p.y) + (q.z - p.z) * (q.z - p.z));
        const int n = std::max(1, static_cast<int>(std::ceil(len / step)));
        for (int j = 0; j < n; ++j) {
            const double t = static_cast<double>(j) / n;
            out.push_back({p.x + (q.x - p.x) * t, p.y + (q.y - p.y) * t, p.z + (q.z - p.z) * t});
        }
    }
    out.push_back(waypoints.back());
    return out;
}

std::vector<ArmTrajectory> plan_arm_trajectories(const Scene& scene, const ArmConf& target, std::uint64_t stream)
{
    const RobotModel& r = scene.robot;
    auto in_annulus = [&](const Vec3& p) {
        const double d = std::hypot(p.x, p.y);
        return d >= r.reach_min && d <= r.reach_max;
    };
    std::vector<ArmTrajectory> out;
    if (!in_annulus(target.position))
        return out;

    SplitMix rng(scene.sampling.seed ^ (0x9e3779b97f4a7c15ULL * (stream + 1)));
    const int kp = scene.sampling.trajectories_per_grasp;
    const double floor_z = scene.table_height + r.gripper_radius;
    // Retreat along the approach direction, away from the object.
    const double ox = std::cos(target.yaw + std::numbers::pi), oy = std::sin(target.yaw + std::numbers::pi);
    const Vec3 rest = scene.rest_position();

    for (int j = 0; j < kp; ++j) {
        const double lift = r.lift_min + (j + rng.uniform()) * (r.lift_max - r.lift_min) / kp;
        const double retreat = rng.uniform() * r.retreat_max;
        const Vec3 via{target.position.x + retreat * ox, target.position.y + retreat * oy, target.position.z + lift};
        if (!in_annulus(via))
            continue;
        ArmTrajectory t;
        t.waypoints = {rest, via, target.position};
        const auto samples = sweep_samples(t.waypoints, scene.sampling.sweep_step);
        if (std::any_of(samples.begin(), samples.end(), [&](const Vec3& p) { return p.z <= floor_z; }))
            continue;
        out.push_back(std::move(t));
    }
    return out;
}

bool trajectory_collides(const Scene& scene, const ArmTrajectory& traj, const ObjectConfig& obstacle, bool holding)
{
    const auto samples = sweep_samples(traj.waypoints, scene.sampling.sweep_step);
    const SweepParams params = sweep_params(scene, holding);
    std::uint8_t hit = 0;
    scan_scalar(samples, params, {&obstacle.x, 1}, {&obstacle.y, 1}, {&obstacle.z, 1}, {&hit, 1});
    return hit != 0;
}

std::uint64_t SplitMix::next()
{
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace ctmp::geo
