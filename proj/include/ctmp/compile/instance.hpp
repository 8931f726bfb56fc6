#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ctmp/geometry/geometry.hpp"

namespace ctmp::cmp {

class InstanceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr const char* kInstanceSchema = "ctmp-instance/1";
inline constexpr const char* kPlanSchema = "ctmp-plan/1";
inline constexpr const char* kVerdictSchema = "ctmp-verdict/1";

/// A placement is either a real-config id or a world point to snap.
struct Placement {
    std::optional<int> config;
    std::optional<geo::Vec3> position;
};

struct ObjectSpec {
    std::string name;
    Placement initial;
};

struct GoalSpec {
    std::string object;
    Placement target;
};

struct Instance {
    std::string scene_hash;  // hex; must match the tables it is compiled against
    int initial_base = 0;
    std::vector<ObjectSpec> objects;
    std::vector<GoalSpec> goals;
};

nlohmann::json instance_to_json(const Instance& inst);
Instance instance_from_json(const nlohmann::json& j);
Instance load_instance(const std::string& path);
void save_instance(const Instance& inst, const std::string& path);

struct Plan {
    std::vector<std::string> actions;
};

nlohmann::json plan_to_json(const Plan& plan);
Plan plan_from_json(const nlohmann::json& j);
Plan load_plan(const std::string& path);

}  // namespace ctmp::cmp
