#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "ctmp/cli/runner.hpp"
#include "ctmp/geometry/scene_io.hpp"

using namespace ctmp;
using nlohmann::json;

namespace {

constexpr int kOk = 0;
constexpr int kFail = 1;
constexpr int kUsage = 2;

struct Shared {
    std::optional<std::uint64_t> seed;
    std::optional<double> time_budget;
    std::optional<long long> node_budget;
    std::string config;
};

struct Sources {
    std::string scene, tables;
};

void add_sources(CLI::App* cmd, Sources& s)
{
    cmd->add_option("--scene", s.scene, "Scene file")->check(CLI::ExistingFile);
    cmd->add_option("--tables", s.tables, "Tables cache written by precompile")->check(CLI::ExistingFile);
}

void write_text(const std::string& path, const std::string& text)
{
    if (const auto dir = std::filesystem::path(path).parent_path(); !dir.empty())
        std::filesystem::create_directories(dir);
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write " + path);
    out << text;
}

void write_json(const std::string& path, const json& j)
{
    write_text(path, j.dump(2) + "\n");
}

json read_json(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw cli::UsageError(path + ": " + e.what());
    }
}

/// Defaults, then the --config file, then explicit flags.
search::PlannerConfig planner_config(const Shared& shared, search::PlannerConfig cfg)
{
    if (!shared.config.empty())
        cfg = cli::config_from_json(read_json(shared.config), cfg);
    if (shared.time_budget)
        cfg.limits.time_budget = *shared.time_budget;
    if (shared.node_budget)
        cfg.limits.node_budget = *shared.node_budget;
    return cfg;
}

std::string record_line(const cli::RunRecord& r)
{
    std::ostringstream s;
    s << r.outcome << "  #o=" << r.objects << " #g=" << r.goals << " #c=" << r.c0;
    s << " L=" << (r.length ? std::to_string(*r.length) : "-") << " E=" << r.expansions;
    s << " prep=" << r.prep << "s search=" << r.search << "s total=" << r.total << "s";
    if (r.valid)
        s << (*r.valid ? " (replay ok)" : " (REPLAY FAILED)");
    return s.str();
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Pick-and-place task planning over precompiled motion tables"};
    app.require_subcommand(1);
    app.fallthrough();

    Shared shared;
    app.add_option("--seed", shared.seed, "Sampling seed (precompile) or placement seed (gen-instance)");
    app.add_option("--time-budget", shared.time_budget, "Seconds for preprocessing plus search")
        ->check(CLI::NonNegativeNumber);
    app.add_option("--node-budget", shared.node_budget, "Generated nodes before giving up")
        ->check(CLI::NonNegativeNumber);
    app.add_option("--config", shared.config, "Search config (JSON)")->check(CLI::ExistingFile);

    // precompile
    auto* pre_cmd = app.add_subcommand("precompile", "Build the motion tables of a scene");
    std::string pre_scene, pre_out;
    bool pre_json = false;
    pre_cmd->add_option("scene", pre_scene, "Scene file")->required()->check(CLI::ExistingFile);
    pre_cmd->add_option("-o,--out", pre_out, "Cache file to write");
    pre_cmd->add_flag("--json", pre_json, "Print the summary as JSON");

    // gen-instance
    auto* gen_cmd = app.add_subcommand("gen-instance", "Place objects and goals at random");
    Sources gen_src;
    add_sources(gen_cmd, gen_src);
    cmp::GenOptions gen;
    bool gen_no_clearance = false;
    std::string gen_out;
    gen_cmd->add_option("--objects", gen.objects, "Number of objects")->check(CLI::NonNegativeNumber);
    gen_cmd->add_option("--goals", gen.goals, "Number of goal objects")->check(CLI::NonNegativeNumber);
    gen_cmd->add_option("--initial-base", gen.initial_base, "Initial base node");
    gen_cmd->add_option("--attempts", gen.attempts, "Redraws allowed by the clearance filter")
        ->check(CLI::PositiveNumber);
    gen_cmd->add_flag("--no-clearance", gen_no_clearance, "Accept the first draw");
    gen_cmd->add_option("-o,--out", gen_out, "Instance file to write (default: stdout)");

    // plan
    auto* plan_cmd = app.add_subcommand("plan", "Plan for an instance");
    Sources plan_src;
    add_sources(plan_cmd, plan_src);
    std::string plan_instance, plan_out, trace_out, record_out, algorithm, order;
    bool prune_w3 = false, no_fallback = false, plan_json = false;
    plan_cmd->add_option("--instance", plan_instance, "Instance file")->required()->check(CLI::ExistingFile);
    plan_cmd->add_option("-o,--plan-out", plan_out, "Plan file to write");
    plan_cmd->add_option("--trace-out", trace_out, "Expanded motion trace to write");
    plan_cmd->add_option("--record-out", record_out, "Run record to write");
    plan_cmd->add_option("--algorithm", algorithm, "bfws, siw or iw")->check(CLI::IsMember({"bfws", "siw", "iw"}));
    plan_cmd->add_option("--order", order, "BFWS counters after novelty, e.g. c,m,g");
    plan_cmd->add_flag("--prune-w3", prune_w3, "BFWS drops nodes of novelty above 2");
    plan_cmd->add_flag("--no-fallback", no_fallback, "Do not continue with BFWS when IW or SIW runs dry");
    plan_cmd->add_flag("--json", plan_json, "Print the run record as JSON");

    // validate
    auto* val_cmd = app.add_subcommand("validate", "Replay a plan against direct geometry");
    Sources val_src;
    add_sources(val_cmd, val_src);
    std::string val_instance, val_plan;
    val_cmd->add_option("--instance", val_instance, "Instance file")->required()->check(CLI::ExistingFile);
    val_cmd->add_option("--plan", val_plan, "Plan file")->required()->check(CLI::ExistingFile);

    // bench
    auto* bench_cmd = app.add_subcommand("bench", "Plan every row of a suite and tabulate");
    std::string suite_file, csv_out, bench_json_out;
    bench_cmd->add_option("suite", suite_file, "Suite file")->required()->check(CLI::ExistingFile);
    bench_cmd->add_option("--csv", csv_out, "Rows as CSV");
    bench_cmd->add_option("--json", bench_json_out, "Rows as JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    search::PlannerConfig defaults;
    defaults.fallback_bfws = true;

    try {
        if (pre_cmd->parsed()) {
            geo::Scene scene = geo::load_scene(pre_scene);
            if (shared.seed)
                scene.sampling.seed = *shared.seed;
            const pre::Tables t = pre::precompile(scene);
            if (!pre_out.empty())
                pre::save_tables(t, pre_out);
            const pre::Summary s = pre::summarize(t);
            if (pre_json)
                std::cout << json{{"scene", pre_scene},
                                  {"scene_hash", geo::hex64(t.scene_hash)},
                                  {"trajectories", s.trajectories},
                                  {"arm_confs", s.arm_confs},
                                  {"base_confs", s.base_confs},
                                  {"virtual_confs", s.virtual_confs},
                                  {"grasp_poses", s.grasp_poses},
                                  {"relative_confs", s.relative_confs},
                                  {"real_confs", s.real_confs},
                                  {"scans", s.scans},
                                  {"build_seconds", s.build_seconds}}
                                 .dump(2)
                          << '\n';
            else
                std::cout << cli::summary_header() << '\n'
                          << cli::summary_row(std::filesystem::path(pre_scene).stem().string(), s) << '\n';
            return kOk;
        }

        if (gen_cmd->parsed()) {
            auto t = cli::open_tables(gen_src.scene, gen_src.tables);
            if (shared.seed)
                gen.seed = *shared.seed;
            gen.require_clearance = !gen_no_clearance;
            const json inst = cmp::instance_to_json(cmp::generate_instance(*t, gen));
            if (gen_out.empty())
                std::cout << inst.dump(2) << '\n';
            else
                write_json(gen_out, inst);
            return kOk;
        }

        if (plan_cmd->parsed()) {
            auto t = cli::open_tables(plan_src.scene, plan_src.tables);
            search::PlannerConfig cfg = planner_config(shared, defaults);
            if (!algorithm.empty())
                cfg.algorithm = search::parse_algorithm(algorithm);
            if (!order.empty()) {
                cfg.order.clear();
                std::stringstream in(order);
                for (std::string c; std::getline(in, c, ',');)
                    cfg.order.push_back(search::parse_counter(c));
            }
            cfg.prune_w3 |= prune_w3;
            if (no_fallback)
                cfg.fallback_bfws = false;

            const auto out = cli::run_plan(cmp::load_instance(plan_instance), t, cfg,
                                           std::filesystem::path(plan_instance).stem().string());
            if (!plan_out.empty() && out.record.outcome == "solved")
                write_json(plan_out, cmp::plan_to_json(out.plan));
            if (!trace_out.empty() && out.record.outcome == "solved")
                write_json(trace_out, out.trace);
            if (!record_out.empty())
                write_json(record_out, cli::record_to_json(out.record));
            if (plan_json)
                std::cout << cli::record_to_json(out.record).dump(2) << '\n';
            else
                std::cout << record_line(out.record) << '\n';
            return out.record.outcome == "solved" && out.record.valid.value_or(false) ? kOk : kFail;
        }

        if (val_cmd->parsed()) {
            auto t = cli::open_tables(val_src.scene, val_src.tables);
            const cmp::Verdict v = cmp::validate_plan(cmp::load_instance(val_instance), t, cmp::load_plan(val_plan));
            std::cout << cmp::verdict_to_json(v).dump(2) << '\n';
            return v.valid ? kOk : kFail;
        }

        if (bench_cmd->parsed()) {
            const auto rows = cli::load_suite(suite_file);
            auto records = cli::run_bench(rows, planner_config(shared, defaults), &std::cerr);
            cli::sort_records(records);
            std::cout << cli::render_table(records);
            if (!csv_out.empty())
                write_text(csv_out, cli::render_csv(records));
            if (!bench_json_out.empty()) {
                json j = json::array();
                for (const auto& r : records)
                    j.push_back(cli::record_to_json(r));
                write_json(bench_json_out, j);
            }
            for (const auto& r : records)
                if (r.outcome == "error" || r.valid == false)
                    return kFail;
            return kOk;
        }
    } catch (const cli::UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kFail;
    }
    return kUsage;
}
