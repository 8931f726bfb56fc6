#include "ctmp/fstrips/ground.hpp"
#include "ctmp/fstrips/parser.hpp"

#include <doctest.h>

#include <fstream>
#include <random>
#include <sstream>

using namespace ctmp::fs;

namespace {

std::shared_ptr<Problem> parse(const std::string& text, std::shared_ptr<ProcedureRegistry> reg = nullptr)
{
    if (!reg)
        reg = std::make_shared<ProcedureRegistry>();
    return parse_problem(text, reg);
}

std::string read_file(const std::string& path)
{
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int var(const Problem& p, const std::string& name)
{
    for (std::size_t i = 0; i < p.variables().size(); ++i)
        if (p.var_name(static_cast<int>(i)) == name)
            return static_cast<int>(i);
    FAIL("no state variable " << name);
    return -1;
}

Value constant(const Problem& p, const std::string& name)
{
    auto c = p.signature.find_constant(name);
    REQUIRE(c.has_value());
    return *c;
}

const char* kCounter = R"(
(define (problem counter)
  (:types (num :range 0 5) (obj o1 o2))
  (:functions (X) - num (Y) - num (mark ?o - obj) - bool)
  (:init (= X 2) (= Y 0) (= (mark o1) false) (= (mark o2) false))
  (:action inc :prec (< X 5) :eff (:= X (+ X 1))))
)";

const char* kCounterOk = R"(
(define (problem counter)
  (:types (num :range 0 5) (obj o1 o2))
  (:functions (X) - num (Y) - num (mark ?o - obj) - bool)
  (:init (= X 2) (= Y 0) (= (mark o1) false) (= (mark o2) false))
  (:action inc :prec (!= X 5) :eff (:= X (+ X 1)))
  (:action swap :eff (and (:= X Y) (:= Y X)))
  (:action noop)
  (:action clash :eff (and (:= X 1) (:= X 2)))
  (:action agree :eff (and (:= X 1) (:= X 1)))
  (:action tag :parameters (?o - obj) :eff (:= (mark ?o) true))
  (:goal (or (= X 3) (= X 2))))
)";

}  // namespace

TEST_SUITE("fstrips")
{
    TEST_CASE("s-expression reader reports unbalanced input")
    {
        CHECK_THROWS_AS(read_sexps("(a (b)"), ParseError);
        CHECK_THROWS_AS(read_sexps("(a))"), ParseError);
        auto s = read_sexps("; comment\n(a b) (c)");
        REQUIRE(s.size() == 2);
        CHECK(s[0].items[1].is("b"));
        CHECK(s[0].line == 2);
    }

    TEST_CASE("unknown symbols are parse errors")
    {
        CHECK_THROWS_AS(parse(kCounter), ParseError);  // '<' is not a symbol
    }

    TEST_CASE("term and formula denotations")
    {
        auto p = parse(read_file(CTMP_DATA_DIR "/problems/blocks.fsp"));
        State s = p->initial_state();
        // clear(loc(c)) where loc(c) = a and clear(a) = false.
        auto gp = ground(p);
        const Value a = constant(*p, "a");
        const Value b = constant(*p, "b");
        const int loc = *p->signature.find_symbol("loc");
        const int clear = *p->signature.find_symbol("clear");
        const int place = *p->signature.find_type("place");
        Term loc_c = Term::apply(loc, place, {Term::constant(constant(*p, "c"), place)});
        Term clear_loc_c = Term::apply(clear, p->signature.bool_type(), {loc_c});
        CHECK(eval_term(*p, s, loc_c) == a);
        CHECK(eval_term(*p, s, clear_loc_c) == 0);
        // Make loc(c) = b with clear(b) = true: clear(loc(c)) now denotes clear(b).
        s.set(static_cast<std::size_t>(var(*p, "(loc c)")), b);
        CHECK(eval_term(*p, s, clear_loc_c) == 1);
        CHECK(eval_term(*p, s, Term::constant(a, place)) == a);

        // clear(b) = true and clear(c) = true
        Formula both = Formula::conj({Formula::eq(Term::state_var(var(*p, "(clear b)"), 0), Term::constant(1, 0)),
                                      Formula::eq(Term::state_var(var(*p, "(clear c)"), 0), Term::constant(1, 0))});
        CHECK(eval_formula(*p, s, both));
        CHECK(eval_formula(*p, s, Formula::eq(Term::constant(a, place), Term::constant(a, place))));
    }

    TEST_CASE("X := X + 1 maps X=2 to X=3 and leaves the rest unchanged")
    {
        auto p = parse(kCounterOk);
        auto gp = ground(p);
        const State& s0 = p->initial_state();
        const GroundAction& inc = gp.actions().at(0);
        CHECK(inc.name == "(inc)");
        State s1 = apply_effects(*p, s0, inc);
        CHECK(s1[static_cast<std::size_t>(var(*p, "X"))] == 3);
        for (std::size_t v = 0; v < s0.size(); ++v)
            if (static_cast<int>(v) != var(*p, "X"))
                CHECK(s1[v] == s0[v]);
        CHECK(gp.is_goal(s0));  // X = 3 or X = 2
        CHECK(gp.is_goal(s1));
        CHECK_FALSE(gp.is_goal(apply_effects(*p, s1, inc)));
    }

    TEST_CASE("effects read the source state")
    {
        auto p = parse(kCounterOk);
        auto gp = ground(p);
        State s = p->initial_state();
        s.set(static_cast<std::size_t>(var(*p, "Y")), 4);
        State t = apply_effects(*p, s, gp.actions().at(1));  // X := Y, Y := X
        CHECK(t[static_cast<std::size_t>(var(*p, "X"))] == 4);
        CHECK(t[static_cast<std::size_t>(var(*p, "Y"))] == 2);
    }

    TEST_CASE("empty effect list leaves the state identical")
    {
        auto p = parse(kCounterOk);
        auto gp = ground(p);
        CHECK(apply_effects(*p, p->initial_state(), gp.actions().at(2)) == p->initial_state());
    }

    TEST_CASE("conflicting writes are a model error, agreeing writes are not")
    {
        auto p = parse(kCounterOk);
        auto gp = ground(p);
        CHECK_THROWS_AS(apply_effects(*p, p->initial_state(), gp.actions().at(3)), ModelError);
        CHECK_NOTHROW(apply_effects(*p, p->initial_state(), gp.actions().at(4)));
    }

    TEST_CASE("values outside the fluent type are rejected")
    {
        auto p = parse(kCounterOk);
        auto gp = ground(p);
        State s = p->initial_state();
        s.set(static_cast<std::size_t>(var(*p, "X")), 5);
        // inc's precondition guards the range, its effect alone does not.
        CHECK_THROWS_AS(apply_effects(*p, s, gp.actions().at(0)), EvalError);
        CHECK_FALSE(is_applicable(*p, s, gp.actions().at(0), gp.constraints()));
    }

    TEST_CASE("clear(loc(b)) := true equals clear(b') := true when loc(b) = b'")
    {
        auto p = parse(read_file(CTMP_DATA_DIR "/problems/blocks.fsp"));
        auto gp = ground(p);
        // unstack(c): loc(c) = a, clear(a) = false.
        const GroundAction* unstack_c = nullptr;
        for (const auto& a : gp.actions())
            if (a.name == "(unstack c)")
                unstack_c = &a;
        REQUIRE(unstack_c);
        State s0 = p->initial_state();
        State s1 = apply_effects(*p, s0, *unstack_c);
        State expected = s0;
        expected.set(static_cast<std::size_t>(var(*p, "(loc c)")), constant(*p, "table"));
        expected.set(static_cast<std::size_t>(var(*p, "(clear a)")), 1);
        CHECK(s1 == expected);
    }

    TEST_CASE("applicability checks the precondition in s and constraints in s_a")
    {
        auto p = parse(read_file(CTMP_DATA_DIR "/problems/blocks.fsp"));
        auto gp = ground(p);
        REQUIRE(gp.constraints().size() == 1);
        auto find = [&](const std::string& n) -> const GroundAction& {
            for (const auto& a : gp.actions())
                if (a.name == n)
                    return a;
            FAIL("missing " << n);
            return gp.actions().front();
        };
        State s = p->initial_state();
        // Build b on c: then a on b would violate the constraint.
        s = apply_effects(*p, s, find("(unstack c)"));
        s = apply_effects(*p, s, find("(move b c)"));
        REQUIRE(gp.constraints_hold(s));
        const GroundAction& a_on_b = find("(move a b)");
        CHECK(eval_formula(*p, s, a_on_b.precondition));
        CHECK_FALSE(is_applicable(*p, s, a_on_b, gp.constraints()));
        CHECK(is_applicable(*p, s, a_on_b, {}));
        // Precondition false: c is not clear after b went on it.
        CHECK_FALSE(is_applicable(*p, s, find("(move c a)"), {}));
    }

    TEST_CASE("grounding counts and order")
    {
        auto p = parse(kCounterOk);
        auto gp = ground(p);
        // inc, swap, noop, clash, agree: one each; tag: one per object.
        REQUIRE(gp.actions().size() == 7);
        CHECK(gp.actions()[5].name == "(tag o1)");
        CHECK(gp.actions()[6].name == "(tag o2)");

        std::string objs;
        for (int i = 0; i < 10; ++i)
            objs += " o" + std::to_string(i);
        auto q = parse("(define (problem c10) (:types (obj" + objs +
                       ") (flag :range 0 1)) (:functions (f ?o - obj) - flag) (:init" + [&] {
                           std::string s;
                           for (int i = 0; i < 10; ++i)
                               s += " (= (f o" + std::to_string(i) + ") 0)";
                           return s;
                       }() + ") (:state-constraint :parameters (?o - obj) (= (f ?o) 0)))");
        CHECK(ground(q).constraints().size() == 10);
    }

    TEST_CASE("empty parameter domains are rejected")
    {
        auto p = std::make_shared<Problem>();
        p->procedures = std::make_shared<ProcedureRegistry>();
        CHECK_THROWS_AS(p->signature.add_type("empty", {}), ModelError);
        CHECK_THROWS_AS(p->signature.add_int_type("bad", 3, 1), ModelError);
        CHECK_THROWS_AS(parse("(define (problem e) (:types (obj)))"), ParseError);
    }

    TEST_CASE("initial states must satisfy the constraints")
    {
        CHECK_THROWS_AS(ground(parse(R"(
            (define (problem bad) (:types (n :range 0 3)) (:functions (X) - n)
              (:init (= X 1)) (:state-constraint (= X 0))))")),
                        ModelError);
    }

    TEST_CASE("procedures are bound by name and must be registered")
    {
        const char* text = R"(
            (define (problem procs)
              (:types (n :range 0 9))
              (:functions (X) - n)
              (:procedures (@double ?x - n) - n (@small ?x - n) - bool)
              (:init (= X 1))
              (:action dbl :prec (@small X) :eff (:= X (@double X)))
              (:goal (= X 8))))";
        CHECK_THROWS_AS(parse(text), ParseError);
        auto reg = std::make_shared<ProcedureRegistry>();
        reg->bind("@double", [](std::span<const Value> a) { return a[0] * 2; });
        reg->bind("@small", [](std::span<const Value> a) { return a[0] < 5 ? 1 : 0; });
        auto p = parse(text, reg);
        auto gp = ground(p);
        State s = p->initial_state();
        for (int i = 0; i < 3; ++i) {
            auto succ = gp.successors(s);
            REQUIRE(succ.size() == 1);
            s = succ[0].state;
        }
        CHECK(gp.is_goal(s));
        CHECK(gp.successors(s).empty());
    }

    TEST_CASE("extensional fixed symbols: table hits, closed-world predicates, misses")
    {
        const char* text = R"(
            (define (problem fixed)
              (:types (n :range 0 3))
              (:functions (X) - n)
              (:fixed (succ ?x - n) - n (small ?x - n) - bool)
              (:init (= X 0) (= (succ 0) 1) (= (succ 1) 2) (small 0) (small 1))
              (:action step :prec (small X) :eff (:= X (succ X)))))";
        auto p = parse(text);
        auto gp = ground(p);
        State s = p->initial_state();
        s = *gp.apply(s, 0);
        s = *gp.apply(s, 0);
        CHECK(s[0] == 2);
        CHECK_FALSE(gp.apply(s, 0).has_value());  // small(2) is false by closed world
        State t = s;
        t.set(0, 2);
        Term succ_x = Term::apply(*p->signature.find_symbol("succ"), 1, {Term::state_var(0, 1)});
        CHECK_THROWS_AS(eval_term(*p, t, succ_x), EvalError);
    }

    TEST_CASE("blocks: a single applicable move")
    {
        // Only c and b are clear; a is under c. From {clear(b), clear(c)} the
        // moves are move(b,c), move(c,b), unstack(c).
        auto p = parse(read_file(CTMP_DATA_DIR "/problems/blocks.fsp"));
        auto gp = ground(p);
        auto succ = gp.successors(p->initial_state());
        std::vector<std::string> names;
        for (const auto& s : succ)
            names.push_back(gp.actions()[static_cast<std::size_t>(s.action)].name);
        CHECK(names == std::vector<std::string>{"(move b c)", "(move c b)", "(unstack c)"});
        // Only move(b, b') exists and both blocks are clear: one successor.
        auto q = parse(R"(
            (define (problem two)
              (:types (src b) (dst bp) (block b bp) (place b bp table))
              (:functions (loc ?x - block) - place (clear ?p - place) - bool)
              (:init (= (loc b) table) (= (loc bp) table)
                     (= (clear b) true) (= (clear bp) true) (= (clear table) true))
              (:action move :parameters (?x - src ?to - dst)
                :prec (and (= (clear ?x) true) (= (clear ?to) true))
                :eff (and (:= (loc ?x) ?to) (:= (clear (loc ?x)) true) (:= (clear ?to) false)))))");
        auto gq = ground(q);
        REQUIRE(gq.actions().size() == 1);
        auto one = gq.successors(q->initial_state());
        REQUIRE(one.size() == 1);
        CHECK(one[0].state[static_cast<std::size_t>(var(*q, "(loc b)"))] == constant(*q, "bp"));
        CHECK(gq.successors(one[0].state).empty());
    }

    TEST_CASE("successors are deterministic and satisfy the frame property")
    {
        auto p = parse(read_file(CTMP_DATA_DIR "/problems/blocks.fsp"));
        auto gp = ground(p);
        std::mt19937 rng(7);
        const auto& vars = p->variables();
        for (int trial = 0; trial < 200; ++trial) {
            std::vector<Value> vals(vars.size());
            for (std::size_t v = 0; v < vars.size(); ++v) {
                const TypeDef& t = p->signature.type(p->var_type(static_cast<int>(v)));
                vals[v] = t.member(std::uniform_int_distribution<std::size_t>(0, t.size() - 1)(rng));
            }
            State s(vals);
            auto a = gp.successors(s);
            auto b = gp.successors(s);
            REQUIRE(a.size() == b.size());
            for (std::size_t i = 0; i < a.size(); ++i) {
                CHECK(a[i].action == b[i].action);
                CHECK(a[i].state == b[i].state);
            }
            for (const auto& ga : gp.actions()) {
                State n;
                try {
                    n = apply_effects(*p, s, ga);
                } catch (const ModelError&) {
                    continue;
                }
                // Every variable that changed is the target of some effect.
                for (std::size_t v = 0; v < vars.size(); ++v) {
                    if (n[v] == s[v])
                        continue;
                    bool written = false;
                    for (const auto& e : ga.effects) {
                        std::vector<Value> args;
                        for (const auto& t : e.args)
                            args.push_back(eval_term(*p, s, t));
                        if (p->var_index(e.fluent, args) == static_cast<int>(v))
                            written = true;
                    }
                    CHECK(written);
                }
            }
        }
    }

    TEST_CASE("constraint induction along random walks")
    {
        auto p = parse(read_file(CTMP_DATA_DIR "/problems/blocks.fsp"));
        auto gp = ground(p);
        std::mt19937 rng(11);
        for (int walk = 0; walk < 50; ++walk) {
            State s = p->initial_state();
            for (int step = 0; step < 20; ++step) {
                REQUIRE(gp.constraints_hold(s));
                auto succ = gp.successors(s);
                if (succ.empty())
                    break;
                s = succ[std::uniform_int_distribution<std::size_t>(0, succ.size() - 1)(rng)].state;
            }
        }
    }

    TEST_CASE("goal satisfaction")
    {
        auto p = parse(read_file(CTMP_DATA_DIR "/problems/blocks.fsp"));
        auto gp = ground(p);
        State s = p->initial_state();
        CHECK_FALSE(gp.is_goal(s));
        s.set(static_cast<std::size_t>(var(*p, "(loc a)")), constant(*p, "b"));
        CHECK(gp.is_goal(s));  // loc(a) = b and loc(b) = table
        s.set(static_cast<std::size_t>(var(*p, "(loc b)")), constant(*p, "c"));
        CHECK_FALSE(gp.is_goal(s));
        CHECK(gp.goal_atoms().size() == 2);
    }

    TEST_CASE("canonical encoding identifies states")
    {
        State a({1, 2, 3});
        State b({1, 2, 3});
        State c({1, 2, 4});
        CHECK(a.encode() == b.encode());
        CHECK(a.encode() != c.encode());
        CHECK(a.encode().size() == 12);
        CHECK(StateHash{}(a) == StateHash{}(b));
    }
}
