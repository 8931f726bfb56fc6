#include "ctmp/compile/instance.hpp"

#include <fstream>

namespace ctmp::cmp {

using nlohmann::json;

namespace {

json placement_to_json(const Placement& p)
{
    if (p.config)
        return *p.config;
    return json::array({p.position->x, p.position->y});
}

Placement placement_from_json(const json& j, const std::string& what)
{
    Placement p;
    if (j.is_number_integer()) {
        p.config = j.get<int>();
    } else if (j.is_array() && (j.size() == 2 || j.size() == 3)) {
        p.position = geo::Vec3{j[0].get<double>(), j[1].get<double>(), j.size() == 3 ? j[2].get<double>() : 0.0};
    } else {
        throw InstanceError(what + " must be a config id or an [x, y] point");
    }
    return p;
}

json read_file(const std::string& path, const char* what)
{
    std::ifstream in(path);
    if (!in)
        throw InstanceError(std::string("cannot open ") + what + " " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw InstanceError(std::string(what) + " " + path + ": " + e.what());
    }
}

}  // namespace

json instance_to_json(const Instance& inst)
{
    json objects = json::array();
    for (const auto& o : inst.objects)
        objects.push_back({{"name", o.name}, {"at", placement_to_json(o.initial)}});
    json goals = json::array();
    for (const auto& g : inst.goals)
        goals.push_back({{"object", g.object}, {"at", placement_to_json(g.target)}});
    return {{"schema", kInstanceSchema},
            {"scene_hash", inst.scene_hash},
            {"initial_base", inst.initial_base},
            {"objects", objects},
            {"goals", goals}};
}

Instance instance_from_json(const json& j)
{
    try {
        if (j.at("schema") != kInstanceSchema)
            throw InstanceError(std::string("instance schema must be \"") + kInstanceSchema + "\"");
        Instance inst;
        inst.scene_hash = j.at("scene_hash").get<std::string>();
        inst.initial_base = j.value("initial_base", 0);
        for (const auto& o : j.at("objects"))
            inst.objects.push_back({o.at("name").get<std::string>(), placement_from_json(o.at("at"), "object placement")});
        for (const auto& g : j.at("goals"))
            inst.goals.push_back({g.at("object").get<std::string>(), placement_from_json(g.at("at"), "goal")});
        return inst;
    } catch (const json::exception& e) {
        throw InstanceError(std::string("malformed instance: ") + e.what());
    }
}

Instance load_instance(const std::string& path)
{
    return instance_from_json(read_file(path, "instance"));
}

void save_instance(const Instance& inst, const std::string& path)
{
    std::ofstream out(path);
    if (!out)
        throw InstanceError("cannot write instance " + path);
    out << instance_to_json(inst).dump(2) << '\n';
}

json plan_to_json(const Plan& plan)
{
    return {{"schema", kPlanSchema}, {"actions", plan.actions}};
}

Plan plan_from_json(const json& j)
{
    try {
        if (j.at("schema") != kPlanSchema)
            throw InstanceError(std::string("plan schema must be \"") + kPlanSchema + "\"");
        return {j.at("actions").get<std::vector<std::string>>()};
    } catch (const json::exception& e) {
        throw InstanceError(std::string("malformed plan: ") + e.what());
    }
}

Plan load_plan(const std::string& path)
{
    return plan_from_json(read_file(path, "plan"));
}

}  // namespace ctmp::cmp
