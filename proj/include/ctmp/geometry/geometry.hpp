#pragma once

// Geometric surrogate for the robot and its workspace: SE(2) base transforms,
// a point end-effector with a swept-sphere volume, vertical-cylinder objects
// and axis-aligned tables of a common height.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ctmp::geo {

class SceneError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Vec3 {
    double x = 0, y = 0, z = 0;
    friend bool operator==(const Vec3&, const Vec3&) = default;
};

/// Normalizes an angle into [-pi, pi).
double wrap_angle(double theta);

struct BasePose {
    double x = 0, y = 0, theta = 0;

    static BasePose make(double x, double y, double theta) { return {x, y, wrap_angle(theta)}; }
    friend bool operator==(const BasePose&, const BasePose&) = default;
};

/// Object center of mass; resting configurations sit at z = h + h'/2.
using ObjectConfig = Vec3;

struct ArmConf {
    Vec3 position;  // end effector, base-local frame
    double yaw = 0;
    bool resting = false;
};

struct ArmTrajectory {
    int id = -1;
    int source = -1;  // arm graph node ids
    int target = -1;
    std::vector<Vec3> waypoints;

    ArmTrajectory reversed() const;
};

struct Table {
    double x_min = 0, x_max = 0, y_min = 0, y_max = 0;
};

struct ObjectShape {
    double radius = 0.03;
    double height = 0.12;
};

struct RobotModel {
    double gripper_radius = 0.04;  // sweep radius with an empty gripper
    double holding_radius = 0.12;  // sweep radius while carrying an object
    double reach_min = 0.35;
    double reach_max = 0.95;
    double standoff = 0.08;        // grasp point distance from the object axis
    Vec3 rest{0.25, 0.0, 0.35};    // resting end effector; z is height above the tables
    double lift_min = 0.08;        // via-point heights above the grasp point
    double lift_max = 0.40;
    double retreat_max = 0.10;     // via-point offset away from the object
};

struct Sampling {
    int virtual_configs = 15;      // D
    int grasps_per_config = 4;     // k
    int trajectories_per_grasp = 4;  // k'
    int bases = 60;                // N_B
    int base_neighbors = 12;       // k_B
    std::uint64_t seed = 1;
    double sweep_step = 0.01;      // delta
    double quantization = 0.005;   // real-config grid
    double snap_distance = 0.02;
    double base_band_min = 0.4;
    double base_band_max = 0.7;
};

struct Scene {
    std::vector<Table> tables;
    double table_height = 0.7;
    ObjectShape object;
    RobotModel robot;
    Sampling sampling;

    /// Throws SceneError when an invariant fails.
    void validate() const;

    double object_z() const { return table_height + object.height / 2; }
    /// Half side of the square virtual table centered on the virtual base. It
    /// covers every point a swept trajectory can touch.
    double virtual_half_extent() const;
    Vec3 rest_position() const { return {robot.rest.x, robot.rest.y, table_height + robot.rest.z}; }
};

/// T_B: base-local point to world frame.
ObjectConfig transform(const BasePose& base, const ObjectConfig& local);
/// T_B^-1: world point to base-local frame.
ObjectConfig inverse_transform(const BasePose& base, const ObjectConfig& world);

bool within_any_table(const Scene& scene, const ObjectConfig& p);
bool within_virtual_table(const Scene& scene, const ObjectConfig& local);

/// Points along the polyline every `step` (at least the waypoints).
std::vector<Vec3> sweep_samples(std::span<const Vec3> waypoints, double step);

/// Up to k' trajectories A0 -> via_j -> target through seeded via points.
/// Trajectories leaving the workspace annulus or dipping into the table slab
/// are dropped; `stream` decorrelates the via points of different targets.
std::vector<ArmTrajectory> plan_arm_trajectories(const Scene& scene, const ArmConf& target, std::uint64_t stream);

/// True iff the polyline swept by r_h (holding) or r_g hits the solid
/// vertical cylinder of the object standing at `obstacle` (same frame).
bool trajectory_collides(const Scene& scene, const ArmTrajectory& traj, const ObjectConfig& obstacle, bool holding);

/// Seeded splitmix64 stream with a platform-independent double draw.
class SplitMix {
public:
    explicit SplitMix(std::uint64_t seed) : state_(seed) {}
    std::uint64_t next();
    /// Uniform in [0, 1) from the top 53 bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

private:
    std::uint64_t state_;
};

}  // namespace ctmp::geo
