#include <doctest.h>

#include <random>

#include "ctmp/compile/compile.hpp"
#include "ctmp/compile/generator.hpp"
#include "ctmp/geometry/scene_io.hpp"
#include "ctmp/search/planner.hpp"

using namespace ctmp;
using namespace ctmp::cmp;

namespace {

std::shared_ptr<const pre::Tables> tables(const std::string& scene)
{
    return std::make_shared<const pre::Tables>(pre::precompile(geo::load_scene(std::string(CTMP_DATA_DIR) + "/scenes/" + scene)));
}

std::shared_ptr<const pre::Tables> one_table()
{
    static auto t = tables("one_table.json");
    return t;
}

std::shared_ptr<const pre::Tables> micro()
{
    static auto t = tables("micro.json");
    return t;
}

Instance generated(int objects, int goals, std::uint64_t seed, std::shared_ptr<const pre::Tables> t = one_table())
{
    GenOptions o;
    o.objects = objects;
    o.goals = goals;
    o.seed = seed;
    return generate_instance(*t, o);
}

std::string schema_of(const CompiledProblem& cp, int action)
{
    return cp.problem->actions[static_cast<std::size_t>(cp.ground->actions()[static_cast<std::size_t>(action)].schema)].name;
}

Plan named(const CompiledProblem& cp, const std::vector<int>& actions)
{
    Plan p;
    for (int a : actions)
        p.actions.push_back(cp.ground->actions()[static_cast<std::size_t>(a)].name);
    return p;
}

}  // namespace

TEST_CASE("ground actions: base edges + arm edges + 2 per object")
{
    auto t = one_table();
    for (int n : {0, 1, 5, 10}) {
        auto cp = compile(generated(n, std::min(n, 1), 3), t);
        CHECK(cp.ground->actions().size() == t->base.edges.size() + t->arm.edges.size() + 2 * static_cast<std::size_t>(n));
        CHECK(cp.ground->constraints().size() == static_cast<std::size_t>(n));
        int grasp = 0, place = 0;
        for (std::size_t a = 0; a < cp.ground->actions().size(); ++a) {
            grasp += schema_of(cp, static_cast<int>(a)) == "Grasp";
            place += schema_of(cp, static_cast<int>(a)) == "Place";
        }
        CHECK(grasp == n);
        CHECK(place == n);
    }
}

TEST_CASE("instance files round-trip and placements snap")
{
    auto t = one_table();
    Instance inst = generated(4, 2, 9);
    CHECK(instance_to_json(instance_from_json(instance_to_json(inst))) == instance_to_json(inst));

    const int c = *inst.objects[0].initial.config;
    geo::Vec3 p = t->real_configs[static_cast<std::size_t>(c)];
    auto [id, d] = snap(*t, {p.x + 0.004, p.y, p.z});
    CHECK(id == c);
    CHECK(d == doctest::Approx(0.004));

    Instance by_point = inst;
    by_point.objects[0].initial = {std::nullopt, geo::Vec3{p.x + 0.003, p.y - 0.002, p.z}};
    auto cp = compile(by_point, t);
    CHECK(cp.initial_configs[0] == c);
    CHECK(cp.initial_snap[0] > 0.0);

    by_point.objects[0].initial.position = geo::Vec3{p.x + 0.5, p.y + 5, p.z};
    CHECK_THROWS_AS(compile(by_point, t), InstanceError);
}

TEST_CASE("compile rejects inconsistent instances")
{
    auto t = one_table();
    Instance inst = generated(3, 1, 2);

    Instance bad = inst;
    bad.scene_hash = "0000000000000000";
    CHECK_THROWS_AS(compile(bad, t), InstanceError);

    bad = inst;
    bad.objects[1].initial = bad.objects[0].initial;
    CHECK_THROWS_AS(compile(bad, t), InstanceError);

    bad = inst;
    bad.goals[0].target = {t->n_real(), std::nullopt};
    CHECK_THROWS_AS(compile(bad, t), InstanceError);

    bad = inst;
    bad.goals.push_back({"nobody", {0, std::nullopt}});
    CHECK_THROWS_AS(compile(bad, t), InstanceError);

    bad = inst;
    bad.initial_base = t->n_bases();
    CHECK_THROWS_AS(compile(bad, t), InstanceError);

    // Another object's goal on an initial placement is left to the search.
    Instance crossed = inst;
    crossed.goals[0].target = crossed.objects[1].initial;
    CHECK_NOTHROW(compile(crossed, t));
}

TEST_CASE("no objects: motion actions only")
{
    auto cp = compile(generated(0, 0, 1), one_table());
    for (std::size_t a = 0; a < cp.ground->actions().size(); ++a) {
        const auto s = schema_of(cp, static_cast<int>(a));
        CHECK((s == "MoveBase" || s == "MoveArm"));
    }
    CHECK(cp.ground->is_goal(cp.problem->initial_state()));
    CHECK(validate_plan(cp.instance, one_table(), Plan{}).valid);
}

TEST_CASE("generated instances satisfy the compile preconditions")
{
    auto t = one_table();
    const auto reachable = reachable_configs(*t, 0);
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        Instance inst = generated(8, 3, seed);
        CompiledProblem cp = compile(inst, t);
        CHECK(cp.ground->constraints_hold(cp.problem->initial_state()));
        CHECK_FALSE(cp.ground->is_goal(cp.problem->initial_state()));
        for (int o = 0; o < cp.n_objects(); ++o) {
            const int c = cp.initial_configs[static_cast<std::size_t>(o)];
            CHECK(std::binary_search(reachable.begin(), reachable.end(), c));
            for (int q = o + 1; q < cp.n_objects(); ++q) {
                const auto& a = t->real_configs[static_cast<std::size_t>(c)];
                const auto& b = t->real_configs[static_cast<std::size_t>(cp.initial_configs[static_cast<std::size_t>(q)])];
                CHECK(std::hypot(a.x - b.x, a.y - b.y) >= 2 * t->scene.object.radius);
            }
        }
        CHECK(passes_clearance_check(*t, inst));
    }
    GenOptions too_many;
    too_many.objects = t->n_real() + 1;
    CHECK_THROWS_AS(generate_instance(*t, too_many), InstanceError);
}

TEST_CASE("Hold and Conf stay consistent; grasp then place restores Conf")
{
    auto t = one_table();
    auto cp = compile(generated(6, 2, 4), t);
    const auto& g = *cp.ground;
    std::mt19937 rng(11);
    int inverse_checks = 0;
    for (int walk = 0; walk < 30; ++walk) {
        fs::State s = cp.problem->initial_state();
        for (int step = 0; step < 40; ++step) {
            auto succ = g.successors(s);
            REQUIRE_FALSE(succ.empty());
            for (const auto& x : succ) {
                if (schema_of(cp, x.action) != "Grasp")
                    continue;
                const int o = cp.held(x.state);
                for (const auto& y : g.successors(x.state))
                    if (schema_of(cp, y.action) == "Place") {
                        CHECK(cp.conf(y.state, o) == cp.conf(s, o));
                        ++inverse_checks;
                    }
            }
            s = succ[rng() % succ.size()].state;
            const int held = cp.held(s);
            int held_confs = 0;
            for (int o = 0; o < cp.n_objects(); ++o)
                if (cp.conf(s, o) < 0) {
                    ++held_confs;
                    CHECK(o == held);
                }
            CHECK(held_confs == (held >= 0 ? 1 : 0));
        }
    }
    CHECK(inverse_checks > 0);
}

TEST_CASE("table-mode successors are valid under direct geometry")
{
    auto t = one_table();
    Instance inst = generated(8, 1, 6);
    auto cp = compile(inst, t);
    std::mt19937 rng(5);
    for (int walk = 0; walk < 20; ++walk) {
        fs::State s = cp.problem->initial_state();
        std::vector<int> actions;
        for (int step = 0; step < 30; ++step) {
            auto succ = cp.ground->successors(s);
            const auto& x = succ[rng() % succ.size()];
            actions.push_back(x.action);
            s = x.state;
        }
        Verdict v = validate_plan(inst, t, named(cp, actions));
        CHECK(v.failed_step == -1);
        CHECK(v.steps == 30);
    }
}

TEST_CASE("validation verdicts")
{
    auto t = one_table();
    Instance inst = generated(5, 1, 2);
    auto cp = compile(inst, t);

    // Goals already met by the initial placement: the empty plan is valid.
    Instance met = inst;
    met.goals[0].target = met.objects[0].initial;
    Verdict v = validate_plan(met, t, Plan{});
    CHECK(v.valid);
    CHECK(v.goal_reached);

    Verdict unknown = validate_plan(inst, t, Plan{{"(Fly b0)"}});
    CHECK_FALSE(unknown.valid);
    CHECK(unknown.failed_step == 0);

    search::PlannerConfig cfg;
    const auto run = search::plan(cp, cfg);
    REQUIRE(run.outcome == "solved");
    Plan plan = named(cp, run.plan);
    Verdict ok = validate_plan(inst, t, plan);
    CHECK(ok.valid);
    CHECK(ok.goal_reached);
    CHECK(ok.steps == static_cast<int>(plan.actions.size()));
    CHECK(verdict_to_json(ok)["valid"] == true);

    // Drop the motions leading to the first grasp: it is no longer graspable.
    std::size_t first_grasp = 0;
    while (schema_of(cp, run.plan[first_grasp]) != "Grasp")
        ++first_grasp;
    Plan early{{plan.actions.begin() + static_cast<long>(first_grasp), plan.actions.end()}};
    Verdict bad = validate_plan(inst, t, early);
    CHECK_FALSE(bad.valid);
    CHECK(bad.failed_step == 0);
    CHECK(bad.reason.find("precondition") != std::string::npos);

    Plan partial{{plan.actions.begin(), plan.actions.end() - 1}};
    Verdict short_plan = validate_plan(inst, t, partial);
    CHECK_FALSE(short_plan.goal_reached);
    CHECK_FALSE(short_plan.valid);

    auto trace = expand_plan(cp, plan);
    CHECK(trace.size() == plan.actions.size());
    for (std::size_t i = 0; i < trace.size(); ++i)
        if (schema_of(cp, run.plan[i]) == "MoveArm")
            CHECK(trace[i]["waypoints_world"].size() == 3);
    CHECK(expand_plan(cp, Plan{}).empty());
}

TEST_CASE("micro scene compiles and plans")
{
    auto t = micro();
    Instance inst = generated(1, 1, 1, t);
    auto cp = compile(inst, t);
    CHECK(cp.ground->actions().size() == t->base.edges.size() + t->arm.edges.size() + 2);
    const auto run = search::plan(cp, {});
    REQUIRE(run.outcome == "solved");
    CHECK(validate_plan(inst, t, named(cp, run.plan)).valid);
}
