#include "ctmp/cli/runner.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include "ctmp/geometry/scene_io.hpp"

namespace ctmp::cli {

using nlohmann::json;

json record_to_json(const RunRecord& r)
{
    json j{{"id", r.id},
           {"objects", r.objects},
           {"goals", r.goals},
           {"c0", r.c0},
           {"length", r.length ? json(*r.length) : json(nullptr)},
           {"expansions", r.expansions},
           {"generated", r.generated},
           {"prep_seconds", r.prep},
           {"search_seconds", r.search},
           {"total_seconds", r.total},
           {"outcome", r.outcome},
           {"algorithm", r.algorithm},
           {"valid", r.valid ? json(*r.valid) : json(nullptr)}};
    if (!r.error.empty())
        j["error"] = r.error;
    return j;
}

RunRecord record_from_json(const json& j)
{
    RunRecord r;
    r.id = j.at("id").get<std::string>();
    r.objects = j.at("objects").get<int>();
    r.goals = j.at("goals").get<int>();
    r.c0 = j.at("c0").get<int>();
    if (!j.at("length").is_null())
        r.length = j["length"].get<int>();
    r.expansions = j.at("expansions").get<long long>();
    r.generated = j.at("generated").get<long long>();
    r.prep = j.at("prep_seconds").get<double>();
    r.search = j.at("search_seconds").get<double>();
    r.total = j.at("total_seconds").get<double>();
    r.outcome = j.at("outcome").get<std::string>();
    r.algorithm = j.at("algorithm").get<std::string>();
    if (!j.at("valid").is_null())
        r.valid = j["valid"].get<bool>();
    r.error = j.value("error", "");
    return r;
}

search::PlannerConfig config_from_json(const json& j, search::PlannerConfig cfg)
{
    if (!j.is_object())
        throw UsageError("config must be a JSON object");
    try {
        for (const auto& [key, v] : j.items()) {
            if (key == "algorithm")
                cfg.algorithm = search::parse_algorithm(v.get<std::string>());
            else if (key == "order") {
                cfg.order.clear();
                for (const auto& c : v)
                    cfg.order.push_back(search::parse_counter(c.get<std::string>()));
            } else if (key == "prune_w3")
                cfg.prune_w3 = v.get<bool>();
            else if (key == "fallback")
                cfg.fallback_bfws = v.get<bool>();
            else if (key == "node_budget")
                cfg.limits.node_budget = v.get<long long>();
            else if (key == "time_budget")
                cfg.limits.time_budget = v.get<double>();
            else if (key == "prep_time_budget")
                cfg.prep_limits.time_budget = v.get<double>();
            else
                throw UsageError("unknown config key '" + key + "'");
        }
    } catch (const json::exception& e) {
        throw UsageError(std::string("bad config value: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    return cfg;
}

json config_to_json(const search::PlannerConfig& cfg)
{
    json order = json::array();
    for (auto c : cfg.order)
        order.push_back(search::to_string(c));
    return {{"algorithm", search::to_string(cfg.algorithm)},
            {"order", order},
            {"prune_w3", cfg.prune_w3},
            {"fallback", cfg.fallback_bfws},
            {"node_budget", cfg.limits.node_budget},
            {"time_budget", cfg.limits.time_budget},
            {"prep_time_budget", cfg.prep_limits.time_budget}};
}

std::shared_ptr<const pre::Tables> open_tables(const std::string& scene_file, const std::string& cache_file)
{
    if (scene_file.empty() && cache_file.empty())
        throw UsageError("need a scene or a tables cache");
    if (cache_file.empty())
        return std::make_shared<const pre::Tables>(pre::precompile(geo::load_scene(scene_file)));
    auto t = std::make_shared<const pre::Tables>(pre::load_tables(cache_file));
    if (!scene_file.empty()) {
        const auto h = geo::scene_hash(geo::load_scene(scene_file));
        if (h != t->scene_hash)
            throw cmp::InstanceError("tables cache " + cache_file + " was built for scene " + geo::hex64(t->scene_hash) +
                                     ", not " + geo::hex64(h));
    }
    return t;
}

PlanOutput run_plan(const cmp::Instance& inst, std::shared_ptr<const pre::Tables> tables,
                    const search::PlannerConfig& cfg, const std::string& id)
{
    search::Clock clock;
    PlanOutput out;
    RunRecord& r = out.record;
    r.id = id;
    const cmp::CompiledProblem cp = cmp::compile(inst, tables);
    const double compile_seconds = clock.seconds();
    const search::PlanRun run = search::plan(cp, cfg);
    r.total = clock.seconds();

    r.objects = cp.n_objects();
    r.goals = static_cast<int>(inst.goals.size());
    r.c0 = run.c0;
    r.expansions = run.stats.expanded;
    r.generated = run.stats.generated;
    r.prep = compile_seconds + run.prep_seconds;
    r.search = run.search_seconds;
    r.outcome = run.outcome;
    r.algorithm = search::to_string(run.algorithm);
    if (run.outcome == "solved") {
        for (int a : run.plan)
            out.plan.actions.push_back(cp.ground->actions()[static_cast<std::size_t>(a)].name);
        r.length = static_cast<int>(run.plan.size());
        r.valid = cmp::validate_plan(inst, tables, out.plan).valid;
        out.trace = cmp::expand_plan(cp, out.plan);
    }
    return out;
}

namespace {

std::string resolve(const std::string& base_dir, const std::string& p)
{
    if (p.empty())
        return p;
    std::filesystem::path path(p);
    return path.is_absolute() ? p : (std::filesystem::path(base_dir) / path).lexically_normal().string();
}

json read_json(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw UsageError(path + ": " + e.what());
    }
}

}  // namespace

std::vector<SuiteRow> suite_from_json(const json& j, const std::string& base_dir)
{
    if (!j.is_object() || !j.contains("rows") || !j["rows"].is_array())
        throw UsageError("suite needs a \"rows\" array");
    const json defaults = j.value("defaults", json::object());
    std::vector<SuiteRow> rows;
    for (const auto& item : j["rows"]) {
        json row = defaults;
        row.update(item);
        SuiteRow s;
        try {
            s.scene = resolve(base_dir, row.value("scene", ""));
            s.tables = resolve(base_dir, row.value("tables", ""));
            s.instance = resolve(base_dir, row.value("instance", ""));
            if (row.contains("generate")) {
                const json& g = row["generate"];
                cmp::GenOptions o;
                o.objects = g.value("objects", o.objects);
                o.goals = g.value("goals", o.goals);
                o.seed = g.value("seed", o.seed);
                o.initial_base = g.value("initial_base", o.initial_base);
                s.generate = o;
            }
            s.config = row.value("config", json::object());
            s.id = row.value("id", "");
        } catch (const json::exception& e) {
            throw UsageError(std::string("bad suite row: ") + e.what());
        }
        if (s.scene.empty() && s.tables.empty())
            throw UsageError("suite row without scene or tables");
        if (s.instance.empty() == !s.generate)
            throw UsageError("suite row needs exactly one of instance and generate");
        if (s.id.empty())
            s.id = s.generate ? "o" + std::to_string(s.generate->objects) + "-g" + std::to_string(s.generate->goals) +
                                    "-s" + std::to_string(s.generate->seed)
                              : std::filesystem::path(s.instance).stem().string();
        rows.push_back(std::move(s));
    }
    return rows;
}

std::vector<SuiteRow> load_suite(const std::string& path)
{
    return suite_from_json(read_json(path), std::filesystem::path(path).parent_path().string());
}

std::vector<RunRecord> run_bench(const std::vector<SuiteRow>& rows, const search::PlannerConfig& defaults,
                                 std::ostream* log)
{
    std::map<std::pair<std::string, std::string>, std::shared_ptr<const pre::Tables>> cache;
    std::vector<RunRecord> out;
    for (const auto& row : rows) {
        RunRecord r;
        try {
            auto& t = cache[{row.scene, row.tables}];
            if (!t)
                t = open_tables(row.scene, row.tables);
            const cmp::Instance inst = row.generate ? cmp::generate_instance(*t, *row.generate)
                                                    : cmp::load_instance(row.instance);
            r = run_plan(inst, t, config_from_json(row.config, defaults), row.id).record;
        } catch (const std::exception& e) {
            r = {};
            r.id = row.id;
            if (row.generate) {
                r.objects = row.generate->objects;
                r.goals = row.generate->goals;
            }
            r.outcome = "error";
            r.error = e.what();
        }
        if (log)
            *log << r.id << ": " << r.outcome << (r.error.empty() ? "" : " (" + r.error + ")") << '\n';
        out.push_back(std::move(r));
    }
    return out;
}

void sort_records(std::vector<RunRecord>& rows)
{
    std::stable_sort(rows.begin(), rows.end(), [](const RunRecord& a, const RunRecord& b) {
        return std::pair(a.objects, a.goals) < std::pair(b.objects, b.goals);
    });
}

namespace {

std::string fixed(double v, int digits)
{
    std::ostringstream s;
    s << std::fixed << std::setprecision(digits) << v;
    return s.str();
}

std::vector<std::string> cells(const RunRecord& r, int digits)
{
    return {r.id,
            std::to_string(r.objects),
            std::to_string(r.goals),
            std::to_string(r.c0),
            r.length ? std::to_string(*r.length) : "-",
            std::to_string(r.expansions),
            fixed(r.prep, digits),
            fixed(r.search, digits),
            fixed(r.total, digits),
            r.outcome,
            r.valid ? (*r.valid ? "yes" : "NO") : "-"};
}

const std::vector<std::string> kColumns{"id", "#o", "#g", "#c", "L", "E", "Prep", "Search", "Total", "outcome", "valid"};

}  // namespace

std::string render_table(const std::vector<RunRecord>& rows)
{
    std::vector<std::vector<std::string>> grid{kColumns};
    for (const auto& r : rows)
        grid.push_back(cells(r, 2));
    std::vector<std::size_t> width(kColumns.size(), 0);
    for (const auto& line : grid)
        for (std::size_t c = 0; c < line.size(); ++c)
            width[c] = std::max(width[c], line[c].size());
    std::ostringstream out;
    for (const auto& line : grid) {
        for (std::size_t c = 0; c < line.size(); ++c) {
            if (c)
                out << "  ";
            // Left-align the id, right-align numbers.
            if (c == 0)
                out << std::left << std::setw(static_cast<int>(width[c])) << line[c];
            else
                out << std::right << std::setw(static_cast<int>(width[c])) << line[c];
        }
        out << '\n';
    }
    return out.str();
}

std::string render_csv(const std::vector<RunRecord>& rows)
{
    std::ostringstream out;
    out << "id,objects,goals,c0,length,expansions,prep_seconds,search_seconds,total_seconds,outcome,valid\n";
    for (const auto& r : rows) {
        auto c = cells(r, 6);
        c[4] = r.length ? c[4] : "";
        c[10] = r.valid ? (*r.valid ? "true" : "false") : "";
        for (std::size_t i = 0; i < c.size(); ++i)
            out << (i ? "," : "") << c[i];
        out << '\n';
    }
    return out.str();
}

std::string summary_header()
{
    return "scene\ttrajectories\tarm_confs\tbase_confs\tvirtual_confs\tgrasp_poses\trelative_confs\treal_confs\tscans\t"
           "build_seconds";
}

std::string summary_row(const std::string& name, const pre::Summary& s)
{
    std::ostringstream out;
    out << name << '\t' << s.trajectories << '\t' << s.arm_confs << '\t' << s.base_confs << '\t' << s.virtual_confs
        << '\t' << s.grasp_poses << '\t' << s.relative_confs << '\t' << s.real_confs << '\t' << s.scans << '\t'
        << fixed(s.build_seconds, 3);
    return out.str();
}

}  // namespace ctmp::cli
