#pragma once

// Everything the planner looks up at plan time. Built once per scene and
// independent of how many objects later populate it.
//
// Id spaces:
//   arm node 0 is the resting configuration A0; grasping nodes follow.
//   arm edge 2i is a planned trajectory A0 -> node, 2i+1 its reversed twin.
//   base edges are directed; every undirected connection appears twice.
//   real configs are world-frame resting configurations on some table,
//   snapped to a square grid of side `quantization`.
//   relative configs are the exact base-local images of real configs that
//   land on the virtual table.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ctmp/geometry/geometry.hpp"

namespace ctmp::pre {

using geo::ArmConf;
using geo::ArmTrajectory;
using geo::BasePose;
using geo::ObjectConfig;
using geo::Scene;

class BuildError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ArmGraph {
    std::vector<ArmConf> nodes;
    std::vector<ArmTrajectory> edges;
    std::vector<int> vplace;  // per node: virtual config id, -1 for A0

    int grasp_nodes() const { return static_cast<int>(nodes.size()) - 1; }
};

struct BaseGraph {
    std::vector<BasePose> nodes;
    std::vector<std::pair<int, int>> edges;
    std::vector<int> component;  // smallest node id in the same component
};

/// Per-trajectory bit rows over relative configs.
class OverlapTable {
public:
    void reset(std::size_t rows, std::size_t cols);
    void set(std::size_t row, std::size_t col) { bits_[row * words_ + col / 64] |= std::uint64_t{1} << (col % 64); }
    bool test(std::size_t row, std::size_t col) const
    {
        return (bits_[row * words_ + col / 64] >> (col % 64)) & 1;
    }
    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t count() const;
    /// Column ids set in `row`, ascending.
    std::vector<int> row(std::size_t row) const;

private:
    std::size_t rows_ = 0, cols_ = 0, words_ = 0;
    std::vector<std::uint64_t> bits_;
};

struct Tables {
    Scene scene;
    std::uint64_t scene_hash = 0;

    int virtual_sampled = 0;                  // D before pruning
    std::vector<ObjectConfig> virtual_configs;  // after pruning
    ArmGraph arm;
    BaseGraph base;
    std::vector<ObjectConfig> real_configs;
    std::vector<ObjectConfig> relative_configs;
    std::vector<int> relative_of;  // [base * |real| + real] -> relative id or -1
    std::vector<int> pose;         // [base * |arm nodes| + node] -> real id or -1
    OverlapTable holding;          // HT
    OverlapTable empty;            // NT

    std::int64_t scans = 0;
    double build_seconds = 0;

    int n_bases() const { return static_cast<int>(base.nodes.size()); }
    int n_arm() const { return static_cast<int>(arm.nodes.size()); }
    int n_real() const { return static_cast<int>(real_configs.size()); }

    /// Real config reached by placing with the arm at `node` from `base`, or -1.
    int proc_pose(int base, int node) const;
    bool proc_graspable(int base, int node, int real) const { return real >= 0 && proc_pose(base, node) == real; }
    bool proc_placeable(int base, int node) const { return proc_pose(base, node) >= 0; }
    /// False iff moving along `traj` at `base` sweeps through an object
    /// resting at real config `real`. Ids outside the real configs (the held
    /// marker) and trajectories outside the edge set (the dummy) never collide.
    bool proc_nonoverlap(int base, int traj, int real, bool holding_object) const;
    int relative_id(int base, int real) const;
};

struct Summary {
    int trajectories, arm_confs, base_confs, virtual_confs, grasp_poses, relative_confs, real_confs;
    std::int64_t scans;
    double build_seconds;
};
Summary summarize(const Tables& t);

// Build stages, in dependency order.
std::vector<ObjectConfig> build_virtual_configs(const Scene& scene);
std::vector<ArmConf> build_grasp_poses(const Scene& scene, const ObjectConfig& v);
/// Prunes `virtual_configs` in place to those with a reachable grasp pose.
ArmGraph build_arm_graph(const Scene& scene, std::vector<ObjectConfig>& virtual_configs);
BaseGraph build_base_graph(const Scene& scene);
/// Fills real configs and the pose table.
void build_real_configs(Tables& t);
/// Fills relative configs and the relative-id index.
void build_relative_configs(Tables& t);
/// Fills HT and NT with one scan per (trajectory, holding flag).
void build_overlap_tables(Tables& t);

Tables precompile(const Scene& scene);

nlohmann::json tables_to_json(const Tables& t);
Tables tables_from_json(const nlohmann::json& j);
void save_tables(const Tables& t, const std::string& path);
Tables load_tables(const std::string& path);

/// Grid key of a world point at the given resolution.
std::pair<std::int64_t, std::int64_t> grid_key(double x, double y, double step);

}  // namespace ctmp::pre
