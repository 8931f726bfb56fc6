#pragma once

// Planning runs and benchmark suites behind the command-line front end.

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ctmp/compile/compile.hpp"
#include "ctmp/compile/generator.hpp"
#include "ctmp/precompile/tables.hpp"
#include "ctmp/search/planner.hpp"

namespace ctmp::cli {

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// One planning run. `length` is set iff the outcome is "solved"; `valid`
/// holds the direct-geometry replay of the returned plan.
struct RunRecord {
    std::string id;
    int objects = 0, goals = 0, c0 = 0;
    std::optional<int> length;
    long long expansions = 0, generated = 0;
    double prep = 0, search = 0, total = 0;
    std::string outcome;
    std::string algorithm;
    std::optional<bool> valid;
    std::string error;  // set when the run itself threw
};

nlohmann::json record_to_json(const RunRecord& r);
RunRecord record_from_json(const nlohmann::json& j);

/// Applies a config block over `base`. Keys: algorithm, order, prune_w3,
/// fallback, node_budget, time_budget, prep_time_budget. Unknown keys throw
/// UsageError.
search::PlannerConfig config_from_json(const nlohmann::json& j, search::PlannerConfig base = {});
nlohmann::json config_to_json(const search::PlannerConfig& cfg);

/// Tables from a scene file (built in memory), a cache file, or both, in
/// which case the cache must have been built from that scene.
std::shared_ptr<const pre::Tables> open_tables(const std::string& scene_file, const std::string& cache_file);

struct PlanOutput {
    RunRecord record;
    cmp::Plan plan;
    nlohmann::json trace;  // expanded motion trace, null unless solved
};

/// Compiles and plans; prep time covers compilation and the obstructing-set
/// pass. Solved plans are replayed against direct geometry.
PlanOutput run_plan(const cmp::Instance& inst, std::shared_ptr<const pre::Tables> tables,
                    const search::PlannerConfig& cfg, const std::string& id = "");

/// A suite file lists rows, each naming a scene or cache and either an
/// instance file or generator options, plus an optional config block.
/// Relative paths resolve against the suite file's directory.
struct SuiteRow {
    std::string id;
    std::string scene, tables, instance;
    std::optional<cmp::GenOptions> generate;
    nlohmann::json config = nlohmann::json::object();
};

std::vector<SuiteRow> suite_from_json(const nlohmann::json& j, const std::string& base_dir = ".");
std::vector<SuiteRow> load_suite(const std::string& path);

/// Runs every row; a row that throws becomes an "error" record. Tables are
/// shared between rows naming the same files. Progress lines go to `log`.
std::vector<RunRecord> run_bench(const std::vector<SuiteRow>& rows, const search::PlannerConfig& defaults,
                                 std::ostream* log = nullptr);

/// Stable sort by (#o, #g).
void sort_records(std::vector<RunRecord>& rows);

std::string render_table(const std::vector<RunRecord>& rows);
std::string render_csv(const std::vector<RunRecord>& rows);

std::string summary_header();
std::string summary_row(const std::string& name, const pre::Summary& s);

}  // namespace ctmp::cli
