#include "ctmp/compile/compile.hpp"

#include <cmath>
#include <set>
#include <sstream>

#include "ctmp/fstrips/parser.hpp"
#include "ctmp/geometry/scene_io.hpp"

namespace ctmp::cmp {

using fs::Value;

std::string base_name(int i)
{
    return "b" + std::to_string(i);
}
std::string edge_name(int i)
{
    return "e" + std::to_string(i);
}
std::string arm_name(int i)
{
    return i == 0 ? "ca0" : "a" + std::to_string(i);
}
std::string traj_name(int i)
{
    return "t" + std::to_string(i);
}
std::string conf_name(int i)
{
    return "c" + std::to_string(i);
}

void Vocabulary::index(const fs::Signature& sig, int n_bases, int n_edges, int n_arm, int n_traj, int n_conf,
                       const std::vector<std::string>& objects)
{
    const std::size_t nc = sig.constant_count();
    auto lookup = [&](const std::string& name) {
        auto v = sig.find_constant(name);
        if (!v)
            throw fs::ModelError("constant '" + name + "' missing from the compiled problem");
        return *v;
    };
    auto fill = [&](int n, auto namer, std::vector<Value>& fwd, std::vector<int>& back) {
        back.assign(nc, -1);
        for (int i = 0; i < n; ++i) {
            fwd.push_back(lookup(namer(i)));
            back[static_cast<std::size_t>(fwd.back())] = i;
        }
    };
    fill(n_bases, base_name, base, base_of);
    fill(n_edges, edge_name, edge, edge_of);
    fill(n_arm, arm_name, arm, arm_of);
    fill(n_traj, traj_name, traj, traj_of);
    fill(n_conf, conf_name, conf, conf_of);
    fill(static_cast<int>(objects.size()), [&](int i) { return objects[static_cast<std::size_t>(i)]; }, object,
         object_of);
    dummy_traj = lookup(kDummyTraj);
    held = lookup(kHeldConf);
    none = lookup("none");
}

int CompiledProblem::base(const fs::State& s) const
{
    return vocab->base_of[static_cast<std::size_t>(s[static_cast<std::size_t>(base_var)])];
}
int CompiledProblem::arm(const fs::State& s) const
{
    return vocab->arm_of[static_cast<std::size_t>(s[static_cast<std::size_t>(arm_var)])];
}
int CompiledProblem::traj(const fs::State& s) const
{
    return vocab->traj_of[static_cast<std::size_t>(s[static_cast<std::size_t>(traj_var)])];
}
int CompiledProblem::held(const fs::State& s) const
{
    return vocab->object_of[static_cast<std::size_t>(s[static_cast<std::size_t>(hold_var)])];
}
int CompiledProblem::conf(const fs::State& s, int o) const
{
    return vocab->conf_of[static_cast<std::size_t>(s[static_cast<std::size_t>(conf_var[static_cast<std::size_t>(o)])])];
}

std::vector<int> CompiledProblem::goal_config_by_object() const
{
    std::vector<int> out(object_names.size(), -1);
    for (const Goal& g : goals)
        out[static_cast<std::size_t>(g.object)] = g.config;
    return out;
}

std::pair<int, double> snap(const pre::Tables& t, const geo::Vec3& world)
{
    int best = -1;
    double best_d = 0;
    for (int i = 0; i < t.n_real(); ++i) {
        const auto& r = t.real_configs[static_cast<std::size_t>(i)];
        const double d = std::hypot(r.x - world.x, r.y - world.y);
        if (best < 0 || d < best_d)
            best = i, best_d = d;
    }
    if (best < 0 || best_d > t.scene.sampling.snap_distance)
        return {-1, best_d};
    return {best, best_d};
}

namespace {

std::pair<int, double> resolve(const pre::Tables& t, const Placement& p, const std::string& what)
{
    if (p.config) {
        if (*p.config < 0 || *p.config >= t.n_real())
            throw InstanceError(what + ": config id " + std::to_string(*p.config) + " is not a real configuration");
        return {*p.config, 0.0};
    }
    auto [id, d] = snap(t, *p.position);
    if (id < 0) {
        std::ostringstream msg;
        msg << what << ": no real configuration within " << t.scene.sampling.snap_distance << " m of ("
            << p.position->x << ", " << p.position->y << ")";
        throw InstanceError(msg.str());
    }
    return {id, d};
}

void list(std::ostringstream& out, const char* type, int n, std::string (*namer)(int), const char* extra = nullptr)
{
    out << "    (" << type;
    for (int i = 0; i < n; ++i)
        out << ' ' << namer(i);
    if (extra)
        out << ' ' << extra;
    out << ")\n";
}

std::string render(const pre::Tables& t, const CompiledProblem& cp)
{
    const int nb = t.n_bases(), ne = static_cast<int>(t.base.edges.size()), na = t.n_arm();
    const int nt = static_cast<int>(t.arm.edges.size()), nc = t.n_real();
    const bool objects = cp.n_objects() > 0;

    std::ostringstream out;
    out << "(define (problem ctmp)\n  (:types\n";
    list(out, "base", nb, base_name);
    list(out, "base-edge", ne, edge_name);
    list(out, "arm", na, arm_name);
    list(out, "traj", nt, traj_name, kDummyTraj);
    list(out, "arm-traj", nt, traj_name);
    list(out, "conf", nc, conf_name, kHeldConf);
    if (objects) {
        out << "    (object";
        for (const auto& o : cp.object_names)
            out << ' ' << o;
        out << ")\n";
    }
    out << "    (hold none";
    for (const auto& o : cp.object_names)
        out << ' ' << o;
    out << "))\n";

    out << "  (:functions\n    (Base) - base\n    (Arm) - arm\n    (Traj) - traj\n    (Hold) - hold";
    if (objects)
        out << "\n    (Conf ?o - object) - conf";
    out << ")\n";
    out << "  (:procedures\n"
           "    (@source-b ?e - base-edge) - base\n"
           "    (@target-b ?e - base-edge) - base\n"
           "    (@source-a ?t - arm-traj) - arm\n"
           "    (@target-a ?t - arm-traj) - arm\n"
           "    (@graspable ?b - base ?a - arm ?c - conf) - bool\n"
           "    (@placeable ?b - base ?a - arm) - bool\n"
           "    (@place ?b - base ?a - arm) - conf\n"
           "    (@nonoverlap ?b - base ?t - traj ?c - conf ?h - hold) - bool)\n";

    out << "  (:init\n    (= (Base) " << base_name(cp.instance.initial_base) << ") (= (Arm) ca0) (= (Traj) "
        << kDummyTraj << ") (= (Hold) none)";
    for (int o = 0; o < cp.n_objects(); ++o)
        out << "\n    (= (Conf " << cp.object_names[static_cast<std::size_t>(o)] << ") "
            << conf_name(cp.initial_configs[static_cast<std::size_t>(o)]) << ")";
    out << ")\n";

    out << "  (:action MoveBase\n"
           "    :parameters (?e - base-edge)\n"
           "    :prec (and (= Arm ca0) (= Base (@source-b ?e)))\n"
           "    :eff (and (:= Base (@target-b ?e)) (:= Traj "
        << kDummyTraj
        << ")))\n"
           "  (:action MoveArm\n"
           "    :parameters (?t - arm-traj)\n"
           "    :prec (and (= Arm (@source-a ?t))\n"
           "               (or (= (@target-a ?t) ca0) (@placeable Base (@target-a ?t))))\n"
           "    :eff (and (:= Arm (@target-a ?t)) (:= Traj ?t)))\n";
    if (objects) {
        out << "  (:action Grasp\n"
               "    :parameters (?o - object)\n"
               "    :prec (and (= Hold none) (@graspable Base Arm (Conf ?o)))\n"
               "    :eff (and (:= Hold ?o) (:= (Conf ?o) "
            << kHeldConf
            << ")))\n"
               "  (:action Place\n"
               "    :parameters (?o - object)\n"
               "    :prec (and (= Hold ?o) (@placeable Base Arm))\n"
               "    :eff (and (:= Hold none) (:= (Conf ?o) (@place Base Arm))))\n"
               "  (:state-constraint\n"
               "    :parameters (?o - object)\n"
               "    (@nonoverlap Base Traj (Conf ?o) Hold))\n";
    }
    out << "  (:goal (and";
    for (const auto& g : cp.goals)
        out << " (= (Conf " << cp.object_names[static_cast<std::size_t>(g.object)] << ") " << conf_name(g.config)
            << ")";
    out << ")))\n";
    return out.str();
}

using VocabSlot = std::shared_ptr<std::shared_ptr<const Vocabulary>>;

std::shared_ptr<fs::ProcedureRegistry> bind_procedures(std::shared_ptr<const pre::Tables> t, VocabSlot slot,
                                                      Collisions collisions)
{
    // The vocabulary only exists once the text is parsed; the procedures are
    // first called during grounding, after it has been filled in.
    auto reg = std::make_shared<fs::ProcedureRegistry>();
    auto V = [slot]() -> const Vocabulary& { return **slot; };
    auto at = [](const std::vector<int>& m, Value v) {
        const int i = (v >= 0 && static_cast<std::size_t>(v) < m.size()) ? m[static_cast<std::size_t>(v)] : -1;
        if (i < 0)
            throw fs::EvalError("procedure argument out of range");
        return i;
    };

    reg->bind("@source-b", [=](std::span<const Value> a) {
        return V().base[static_cast<std::size_t>(t->base.edges[static_cast<std::size_t>(at(V().edge_of, a[0]))].first)];
    });
    reg->bind("@target-b", [=](std::span<const Value> a) {
        return V().base[static_cast<std::size_t>(t->base.edges[static_cast<std::size_t>(at(V().edge_of, a[0]))].second)];
    });
    reg->bind("@source-a", [=](std::span<const Value> a) {
        return V().arm[static_cast<std::size_t>(t->arm.edges[static_cast<std::size_t>(at(V().traj_of, a[0]))].source)];
    });
    reg->bind("@target-a", [=](std::span<const Value> a) {
        return V().arm[static_cast<std::size_t>(t->arm.edges[static_cast<std::size_t>(at(V().traj_of, a[0]))].target)];
    });
    reg->bind("@graspable", [=](std::span<const Value> a) -> Value {
        if (a[2] == V().held)
            return 0;
        return t->proc_graspable(at(V().base_of, a[0]), at(V().arm_of, a[1]), at(V().conf_of, a[2]));
    });
    reg->bind("@placeable", [=](std::span<const Value> a) -> Value {
        return t->proc_placeable(at(V().base_of, a[0]), at(V().arm_of, a[1]));
    });
    reg->bind("@place", [=](std::span<const Value> a) -> Value {
        const int c = t->proc_pose(at(V().base_of, a[0]), at(V().arm_of, a[1]));
        if (c < 0)
            throw fs::EvalError("@place at a pose that does not denote a table configuration");
        return V().conf[static_cast<std::size_t>(c)];
    });
    if (collisions == Collisions::Tables) {
        reg->bind("@nonoverlap", [=](std::span<const Value> a) -> Value {
            if (a[2] == V().held || a[1] == V().dummy_traj)
                return 1;
            return t->proc_nonoverlap(at(V().base_of, a[0]), at(V().traj_of, a[1]), at(V().conf_of, a[2]),
                                      a[3] != V().none);
        });
    } else {
        reg->bind("@nonoverlap", [=](std::span<const Value> a) -> Value {
            if (a[2] == V().held || a[1] == V().dummy_traj)
                return 1;
            const auto& base = t->base.nodes[static_cast<std::size_t>(at(V().base_of, a[0]))];
            const auto& traj = t->arm.edges[static_cast<std::size_t>(at(V().traj_of, a[1]))];
            const auto& real = t->real_configs[static_cast<std::size_t>(at(V().conf_of, a[2]))];
            return !geo::trajectory_collides(t->scene, traj, geo::inverse_transform(base, real), a[3] != V().none);
        });
    }
    return reg;
}

}  // namespace

CompiledProblem compile(const Instance& inst, std::shared_ptr<const pre::Tables> tables, Collisions collisions)
{
    const pre::Tables& t = *tables;
    if (inst.scene_hash != geo::hex64(t.scene_hash))
        throw InstanceError("instance was generated for scene " + inst.scene_hash + ", tables are for " +
                            geo::hex64(t.scene_hash));
    if (inst.initial_base < 0 || inst.initial_base >= t.n_bases())
        throw InstanceError("initial base " + std::to_string(inst.initial_base) + " does not exist");

    CompiledProblem cp;
    cp.tables = tables;
    cp.instance = inst;
    cp.collisions = collisions;

    std::set<std::string> names;
    std::set<int> taken;
    for (const auto& o : inst.objects) {
        if (o.name.empty() || o.name[0] == '?' || o.name[0] == '@' || o.name == "none" ||
            o.name.find_first_of("() \t\n;") != std::string::npos)
            throw InstanceError("invalid object name '" + o.name + "'");
        if (!names.insert(o.name).second)
            throw InstanceError("duplicate object name '" + o.name + "'");
        auto [c, d] = resolve(t, o.initial, "object " + o.name);
        if (!taken.insert(c).second)
            throw InstanceError("object " + o.name + " shares real configuration " + std::to_string(c));
        cp.object_names.push_back(o.name);
        cp.initial_configs.push_back(c);
        cp.initial_snap.push_back(d);
    }
    std::set<int> goal_objects;
    for (const auto& g : inst.goals) {
        auto it = std::find(cp.object_names.begin(), cp.object_names.end(), g.object);
        if (it == cp.object_names.end())
            throw InstanceError("goal refers to unknown object '" + g.object + "'");
        const int o = static_cast<int>(it - cp.object_names.begin());
        if (!goal_objects.insert(o).second)
            throw InstanceError("two goals for object '" + g.object + "'");
        auto [c, d] = resolve(t, g.target, "goal for " + g.object);
        cp.goals.push_back({o, c, d});
    }

    cp.text = render(t, cp);
    auto vocab_slot = std::make_shared<std::shared_ptr<const Vocabulary>>();
    auto registry = bind_procedures(tables, vocab_slot, collisions);

    std::shared_ptr<fs::Problem> problem = fs::parse_problem(cp.text, registry);
    auto vocab = std::make_shared<Vocabulary>();
    vocab->index(problem->signature, t.n_bases(), static_cast<int>(t.base.edges.size()), t.n_arm(),
                 static_cast<int>(t.arm.edges.size()), t.n_real(), cp.object_names);
    *vocab_slot = vocab;
    cp.vocab = vocab;

    const auto& sig = problem->signature;
    cp.base_var = *problem->var_index(*sig.find_symbol("Base"), {});
    cp.arm_var = *problem->var_index(*sig.find_symbol("Arm"), {});
    cp.traj_var = *problem->var_index(*sig.find_symbol("Traj"), {});
    cp.hold_var = *problem->var_index(*sig.find_symbol("Hold"), {});
    if (cp.n_objects() > 0) {
        const int conf = *sig.find_symbol("Conf");
        for (Value v : vocab->object)
            cp.conf_var.push_back(*problem->var_index(conf, std::span<const Value>(&v, 1)));
    }

    cp.problem = problem;
    try {
        cp.ground = std::make_shared<const fs::GroundProblem>(fs::ground(problem));
    } catch (const fs::ModelError& e) {
        throw InstanceError(std::string("initial state is inconsistent: ") + e.what());
    }
    return cp;
}

int find_action(const CompiledProblem& cp, const std::string& name)
{
    const auto& actions = cp.ground->actions();
    for (std::size_t i = 0; i < actions.size(); ++i)
        if (actions[i].name == name)
            return static_cast<int>(i);
    return -1;
}

nlohmann::json verdict_to_json(const Verdict& v)
{
    nlohmann::json j = {{"schema", kVerdictSchema},
                        {"valid", v.valid},
                        {"goal_reached", v.goal_reached},
                        {"steps", v.steps},
                        {"reason", v.reason}};
    j["failed_step"] = v.failed_step >= 0 ? nlohmann::json(v.failed_step) : nlohmann::json(nullptr);
    return j;
}

Verdict validate_plan(const Instance& inst, std::shared_ptr<const pre::Tables> tables, const Plan& plan)
{
    return validate_plan(compile(inst, std::move(tables), Collisions::Geometry), plan);
}

Verdict validate_plan(const CompiledProblem& cp, const Plan& plan)
{
    const fs::Problem& p = *cp.problem;
    const fs::GroundProblem& g = *cp.ground;
    Verdict v;
    fs::State s = p.initial_state();
    for (std::size_t i = 0; i < plan.actions.size(); ++i) {
        const std::string& name = plan.actions[i];
        v.failed_step = static_cast<int>(i);
        const int a = find_action(cp, name);
        if (a < 0) {
            v.reason = "unknown action " + name;
            return v;
        }
        const fs::GroundAction& ga = g.actions()[static_cast<std::size_t>(a)];
        if (!fs::eval_formula(p, s, ga.precondition)) {
            v.reason = "precondition of " + name + " does not hold";
            return v;
        }
        fs::State next = fs::apply_effects(p, s, ga);
        for (std::size_t c = 0; c < g.constraints().size(); ++c)
            if (!fs::eval_formula(p, next, g.constraints()[c])) {
                v.reason = name + " sweeps through object " +
                           (c < cp.object_names.size() ? cp.object_names[c] : std::to_string(c));
                return v;
            }
        s = std::move(next);
        v.steps = static_cast<int>(i) + 1;
    }
    v.failed_step = -1;
    v.goal_reached = g.is_goal(s);
    v.valid = v.goal_reached;
    if (!v.goal_reached)
        v.reason = "the final state does not satisfy the goal";
    return v;
}

nlohmann::json expand_plan(const CompiledProblem& cp, const Plan& plan)
{
    using nlohmann::json;
    const pre::Tables& t = *cp.tables;
    const fs::Problem& p = *cp.problem;
    const fs::GroundProblem& g = *cp.ground;
    auto pt = [](const geo::Vec3& v) { return json::array({v.x, v.y, v.z}); };

    json trace = json::array();
    fs::State s = p.initial_state();
    for (const std::string& name : plan.actions) {
        const int a = find_action(cp, name);
        if (a < 0)
            throw InstanceError("unknown action " + name);
        const fs::GroundAction& ga = g.actions()[static_cast<std::size_t>(a)];
        const auto& schema = p.actions[static_cast<std::size_t>(ga.schema)].name;
        const int b = cp.base(s);
        const auto& base = t.base.nodes[static_cast<std::size_t>(b)];
        json step = {{"action", name}};
        if (schema == "MoveBase") {
            const auto& e = t.base.edges[static_cast<std::size_t>(cp.vocab->edge_of[static_cast<std::size_t>(ga.args[0])])];
            const auto& from = t.base.nodes[static_cast<std::size_t>(e.first)];
            const auto& to = t.base.nodes[static_cast<std::size_t>(e.second)];
            step["kind"] = "base";
            step["path"] = json::array({json::array({from.x, from.y, from.theta}), json::array({to.x, to.y, to.theta})});
        } else if (schema == "MoveArm") {
            const auto& tr = t.arm.edges[static_cast<std::size_t>(cp.vocab->traj_of[static_cast<std::size_t>(ga.args[0])])];
            json local = json::array(), world = json::array();
            for (const auto& w : tr.waypoints) {
                local.push_back(pt(w));
                world.push_back(pt(geo::transform(base, w)));
            }
            step["kind"] = "arm";
            step["base"] = json::array({base.x, base.y, base.theta});
            step["waypoints_local"] = local;
            step["waypoints_world"] = world;
        } else {
            const int o = cp.vocab->object_of[static_cast<std::size_t>(ga.args[0])];
            const int c = schema == "Grasp" ? cp.conf(s, o) : t.proc_pose(b, cp.arm(s));
            step["kind"] = schema == "Grasp" ? "grasp" : "place";
            step["object"] = cp.object_names[static_cast<std::size_t>(o)];
            step["config"] = c;
            if (c >= 0)
                step["position"] = pt(t.real_configs[static_cast<std::size_t>(c)]);
        }
        trace.push_back(std::move(step));
        auto next = g.apply(s, a);
        if (!next)
            throw InstanceError("plan is not executable at " + name);
        s = std::move(*next);
    }
    return trace;
}

}  // namespace ctmp::cmp
