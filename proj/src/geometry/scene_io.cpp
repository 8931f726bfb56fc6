#include "ctmp/geometry/scene_io.hpp"

#include <cstdio>
#include <fstream>
#include <set>

namespace ctmp::geo {

using nlohmann::json;

namespace {

void check_keys(const json& j, const char* where, std::initializer_list<const char*> allowed)
{
    if (!j.is_object())
        throw SceneError(std::string(where) + " must be an object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, _] : j.items())
        if (!ok.count(key))
            throw SceneError(std::string("unknown field '") + key + "' in " + where);
}

template <class T>
void read(const json& j, const char* key, T& out)
{
    if (!j.contains(key))
        return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw SceneError(std::string("field '") + key + "': " + e.what());
    }
}

Vec3 read_vec3(const json& j)
{
    if (!j.is_array() || j.size() != 3)
        throw SceneError("expected a 3-element array");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

}  // namespace

Scene scene_from_json(const json& j)
{
    check_keys(j, "scene", {"schema", "tables", "table_height", "object", "robot", "sampling", "objects"});
    if (!j.contains("schema") || j["schema"] != kSceneSchema)
        throw SceneError(std::string("scene schema must be \"") + kSceneSchema + "\"");

    Scene s;
    if (!j.contains("tables") || !j["tables"].is_array())
        throw SceneError("scene needs a \"tables\" array");
    for (const json& t : j["tables"]) {
        if (!t.is_array() || t.size() != 4)
            throw SceneError("table must be [x_min, x_max, y_min, y_max]");
        s.tables.push_back({t[0].get<double>(), t[1].get<double>(), t[2].get<double>(), t[3].get<double>()});
    }
    read(j, "table_height", s.table_height);

    if (j.contains("object")) {
        const json& o = j["object"];
        check_keys(o, "object", {"radius", "height"});
        read(o, "radius", s.object.radius);
        read(o, "height", s.object.height);
    }
    if (j.contains("robot")) {
        const json& r = j["robot"];
        check_keys(r, "robot",
                   {"gripper_radius", "holding_radius", "reach_min", "reach_max", "standoff", "rest", "lift_min",
                    "lift_max", "retreat_max"});
        read(r, "gripper_radius", s.robot.gripper_radius);
        read(r, "holding_radius", s.robot.holding_radius);
        read(r, "reach_min", s.robot.reach_min);
        read(r, "reach_max", s.robot.reach_max);
        read(r, "standoff", s.robot.standoff);
        if (r.contains("rest"))
            s.robot.rest = read_vec3(r["rest"]);
        read(r, "lift_min", s.robot.lift_min);
        read(r, "lift_max", s.robot.lift_max);
        read(r, "retreat_max", s.robot.retreat_max);
    }
    if (j.contains("sampling")) {
        const json& m = j["sampling"];
        check_keys(m, "sampling",
                   {"D", "k", "k_prime", "N_B", "k_B", "seed", "sweep_step", "quantization", "snap_distance",
                    "base_band"});
        read(m, "D", s.sampling.virtual_configs);
        read(m, "k", s.sampling.grasps_per_config);
        read(m, "k_prime", s.sampling.trajectories_per_grasp);
        read(m, "N_B", s.sampling.bases);
        read(m, "k_B", s.sampling.base_neighbors);
        read(m, "seed", s.sampling.seed);
        read(m, "sweep_step", s.sampling.sweep_step);
        read(m, "quantization", s.sampling.quantization);
        read(m, "snap_distance", s.sampling.snap_distance);
        if (m.contains("base_band")) {
            const json& b = m["base_band"];
            if (!b.is_array() || b.size() != 2)
                throw SceneError("base_band must be [min, max]");
            s.sampling.base_band_min = b[0].get<double>();
            s.sampling.base_band_max = b[1].get<double>();
        }
    }
    // "objects" is informational: the tables never depend on it.
    if (j.contains("objects") && !(j["objects"].is_number_integer() && j["objects"].get<long long>() >= 0))
        throw SceneError("objects must be a non-negative integer");
    s.validate();
    return s;
}

json scene_to_json(const Scene& s)
{
    json tables = json::array();
    for (const Table& t : s.tables)
        tables.push_back({t.x_min, t.x_max, t.y_min, t.y_max});
    const RobotModel& r = s.robot;
    const Sampling& m = s.sampling;
    return {
        {"schema", kSceneSchema},
        {"tables", tables},
        {"table_height", s.table_height},
        {"object", {{"radius", s.object.radius}, {"height", s.object.height}}},
        {"robot",
         {{"gripper_radius", r.gripper_radius},
          {"holding_radius", r.holding_radius},
          {"reach_min", r.reach_min},
          {"reach_max", r.reach_max},
          {"standoff", r.standoff},
          {"rest", {r.rest.x, r.rest.y, r.rest.z}},
          {"lift_min", r.lift_min},
          {"lift_max", r.lift_max},
          {"retreat_max", r.retreat_max}}},
        {"sampling",
         {{"D", m.virtual_configs},
          {"k", m.grasps_per_config},
          {"k_prime", m.trajectories_per_grasp},
          {"N_B", m.bases},
          {"k_B", m.base_neighbors},
          {"seed", m.seed},
          {"sweep_step", m.sweep_step},
          {"quantization", m.quantization},
          {"snap_distance", m.snap_distance},
          {"base_band", {m.base_band_min, m.base_band_max}}}},
    };
}

Scene load_scene(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw SceneError("cannot open scene file " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw SceneError("scene file " + path + ": " + e.what());
    }
    return scene_from_json(j);
}

std::uint64_t scene_hash(const Scene& scene)
{
    const std::string text = scene_to_json(scene).dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

}  // namespace ctmp::geo
