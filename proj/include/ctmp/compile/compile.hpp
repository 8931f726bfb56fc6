#pragma once

// Pick-and-place planning problem over precompiled tables. State variables:
// Base, Arm, Traj, Hold and Conf(o) per object. Actions: MoveBase(e),
// MoveArm(t), Grasp(o), Place(o). One state constraint per object keeps every
// object out of the volume swept by the last arm motion.

#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "ctmp/compile/instance.hpp"
#include "ctmp/fstrips/ground.hpp"
#include "ctmp/precompile/tables.hpp"

namespace ctmp::cmp {

/// Where @nonoverlap gets its answers.
enum class Collisions { Tables, Geometry };

std::string base_name(int i);
std::string edge_name(int i);
std::string arm_name(int i);  // 0 is "ca0"
std::string traj_name(int i);
std::string conf_name(int i);
inline constexpr const char* kDummyTraj = "t-dummy";
inline constexpr const char* kHeldConf = "c-held";

/// Ids of every constant kind, in both directions.
struct Vocabulary {
    std::vector<fs::Value> base, edge, arm, traj, conf, object;
    fs::Value dummy_traj = -1, held = -1, none = -1;

    // Constant id -> index in the lists above, or -1.
    std::vector<int> base_of, edge_of, arm_of, traj_of, conf_of, object_of;

    void index(const fs::Signature& sig, int n_bases, int n_edges, int n_arm, int n_traj, int n_conf,
               const std::vector<std::string>& objects);
};

struct CompiledProblem {
    std::shared_ptr<const pre::Tables> tables;
    Instance instance;
    Collisions collisions = Collisions::Tables;

    std::vector<std::string> object_names;
    std::vector<int> initial_configs;  // per object
    std::vector<double> initial_snap;  // snap distance per object
    struct Goal {
        int object, config;
        double snap;
    };
    std::vector<Goal> goals;

    std::string text;  // the rendered problem
    std::shared_ptr<const fs::Problem> problem;
    std::shared_ptr<const fs::GroundProblem> ground;
    std::shared_ptr<const Vocabulary> vocab;

    int base_var = -1, arm_var = -1, traj_var = -1, hold_var = -1;
    std::vector<int> conf_var;  // per object

    int n_objects() const { return static_cast<int>(object_names.size()); }
    int base(const fs::State& s) const;
    int arm(const fs::State& s) const;
    /// Trajectory index, or -1 for the dummy.
    int traj(const fs::State& s) const;
    /// Held object index, or -1.
    int held(const fs::State& s) const;
    /// Real config of object o, or -1 while held.
    int conf(const fs::State& s, int o) const;
    /// Goal config per object, -1 where unconstrained.
    std::vector<int> goal_config_by_object() const;
};

/// Snaps placements, renders the problem text, parses and grounds it.
/// Throws InstanceError on snapping or consistency failures.
CompiledProblem compile(const Instance& inst, std::shared_ptr<const pre::Tables> tables,
                        Collisions collisions = Collisions::Tables);

/// Nearest real config within the snap distance, with the distance.
std::pair<int, double> snap(const pre::Tables& tables, const geo::Vec3& world);

struct Verdict {
    bool valid = false;
    bool goal_reached = false;
    int steps = 0;         // actions replayed successfully
    int failed_step = -1;  // index of the rejected action
    std::string reason;
};

nlohmann::json verdict_to_json(const Verdict& v);

/// Replays the plan with @nonoverlap answered by direct geometry.
Verdict validate_plan(const Instance& inst, std::shared_ptr<const pre::Tables> tables, const Plan& plan);
Verdict validate_plan(const CompiledProblem& geometric, const Plan& plan);

/// Motion-level trace: arm polylines in local and world frames, base moves as
/// 2-D segments, grasp and place events with world configs.
nlohmann::json expand_plan(const CompiledProblem& cp, const Plan& plan);

/// Ground action index by name, or -1.
int find_action(const CompiledProblem& cp, const std::string& name);

}  // namespace ctmp::cmp
