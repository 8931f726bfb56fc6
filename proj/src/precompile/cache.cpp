#include <fstream>

#include "ctmp/geometry/scene_io.hpp"
#include "ctmp/precompile/tables.hpp"

namespace ctmp::pre {

using nlohmann::json;

namespace {

constexpr const char* kCacheSchema = "ctmp-tables/1";

json vec(const geo::Vec3& v)
{
    return json::array({v.x, v.y, v.z});
}

geo::Vec3 vec(const json& j)
{
    return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
}

json configs(const std::vector<ObjectConfig>& cs)
{
    json out = json::array();
    for (const auto& c : cs)
        out.push_back(vec(c));
    return out;
}

std::vector<ObjectConfig> configs(const json& j)
{
    std::vector<ObjectConfig> out;
    for (const auto& c : j)
        out.push_back(vec(c));
    return out;
}

json rows(const OverlapTable& t)
{
    json out = json::array();
    for (std::size_t r = 0; r < t.rows(); ++r)
        out.push_back(t.row(r));
    return out;
}

void fill(OverlapTable& t, const json& j, std::size_t rows, std::size_t cols)
{
    if (j.size() != rows)
        throw BuildError("overlap table row count does not match the trajectories");
    t.reset(rows, cols);
    for (std::size_t r = 0; r < rows; ++r)
        for (const auto& c : j[r]) {
            const auto col = c.get<std::size_t>();
            if (col >= cols)
                throw BuildError("overlap table column out of range");
            t.set(r, col);
        }
}

}  // namespace

// The build time is deliberately left out: caches are compared byte for byte.
json tables_to_json(const Tables& t)
{
    json arm_nodes = json::array();
    for (std::size_t i = 0; i < t.arm.nodes.size(); ++i) {
        const ArmConf& a = t.arm.nodes[i];
        arm_nodes.push_back({{"position", vec(a.position)}, {"yaw", a.yaw}, {"resting", a.resting},
                             {"vplace", t.arm.vplace[i]}});
    }
    json arm_edges = json::array();
    for (const ArmTrajectory& e : t.arm.edges) {
        json wps = json::array();
        for (const auto& w : e.waypoints)
            wps.push_back(vec(w));
        arm_edges.push_back({{"source", e.source}, {"target", e.target}, {"waypoints", wps}});
    }
    json bases = json::array();
    for (const BasePose& b : t.base.nodes)
        bases.push_back(json::array({b.x, b.y, b.theta}));
    json base_edges = json::array();
    for (const auto& [a, b] : t.base.edges)
        base_edges.push_back(json::array({a, b}));

    return {
        {"schema", kCacheSchema},
        {"scene", geo::scene_to_json(t.scene)},
        {"scene_hash", geo::hex64(t.scene_hash)},
        {"virtual_sampled", t.virtual_sampled},
        {"virtual_configs", configs(t.virtual_configs)},
        {"arm_nodes", arm_nodes},
        {"arm_edges", arm_edges},
        {"bases", bases},
        {"base_edges", base_edges},
        {"base_component", t.base.component},
        {"real_configs", configs(t.real_configs)},
        {"relative_configs", configs(t.relative_configs)},
        {"relative_of", t.relative_of},
        {"pose", t.pose},
        {"ht", rows(t.holding)},
        {"nt", rows(t.empty)},
        {"scans", t.scans},
    };
}

Tables tables_from_json(const json& j)
{
    try {
        if (j.at("schema") != kCacheSchema)
            throw BuildError(std::string("cache schema must be \"") + kCacheSchema + "\"");
        Tables t;
        t.scene = geo::scene_from_json(j.at("scene"));
        t.scene_hash = geo::scene_hash(t.scene);
        if (geo::hex64(t.scene_hash) != j.at("scene_hash").get<std::string>())
            throw BuildError("cache scene hash does not match its embedded scene");
        t.virtual_sampled = j.at("virtual_sampled").get<int>();
        t.virtual_configs = configs(j.at("virtual_configs"));
        for (const auto& n : j.at("arm_nodes")) {
            t.arm.nodes.push_back({vec(n.at("position")), n.at("yaw").get<double>(), n.at("resting").get<bool>()});
            t.arm.vplace.push_back(n.at("vplace").get<int>());
        }
        for (const auto& e : j.at("arm_edges")) {
            ArmTrajectory tr;
            tr.id = static_cast<int>(t.arm.edges.size());
            tr.source = e.at("source").get<int>();
            tr.target = e.at("target").get<int>();
            for (const auto& w : e.at("waypoints"))
                tr.waypoints.push_back(vec(w));
            t.arm.edges.push_back(std::move(tr));
        }
        for (const auto& b : j.at("bases"))
            t.base.nodes.push_back({b.at(0).get<double>(), b.at(1).get<double>(), b.at(2).get<double>()});
        for (const auto& e : j.at("base_edges"))
            t.base.edges.push_back({e.at(0).get<int>(), e.at(1).get<int>()});
        t.base.component = j.at("base_component").get<std::vector<int>>();
        t.real_configs = configs(j.at("real_configs"));
        t.relative_configs = configs(j.at("relative_configs"));
        t.relative_of = j.at("relative_of").get<std::vector<int>>();
        t.pose = j.at("pose").get<std::vector<int>>();
        t.scans = j.at("scans").get<std::int64_t>();

        const std::size_t nb = t.base.nodes.size(), na = t.arm.nodes.size();
        if (t.relative_of.size() != nb * t.real_configs.size() || t.pose.size() != nb * na ||
            t.arm.vplace.size() != na || t.base.component.size() != nb)
            throw BuildError("cache index sizes are inconsistent");
        fill(t.holding, j.at("ht"), t.arm.edges.size(), t.relative_configs.size());
        fill(t.empty, j.at("nt"), t.arm.edges.size(), t.relative_configs.size());
        return t;
    } catch (const json::exception& e) {
        throw BuildError(std::string("malformed cache: ") + e.what());
    }
}

void save_tables(const Tables& t, const std::string& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw BuildError("cannot write cache " + path);
    out << tables_to_json(t).dump() << '\n';
}

Tables load_tables(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw BuildError("cannot open cache " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw BuildError("cache " + path + ": " + e.what());
    }
    return tables_from_json(j);
}

}  // namespace ctmp::pre
