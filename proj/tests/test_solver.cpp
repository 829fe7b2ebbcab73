#include "cfgs/asp/completion.hpp"
#include "cfgs/asp/parser.hpp"
#include "cfgs/asp/serialize.hpp"
#include "cfgs/compile.hpp"
#include "cfgs/errors.hpp"
#include "cfgs/oracle/oracle.hpp"
#include "cfgs/solver/solver.hpp"
#include "support/random_spec.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <functional>

using namespace cfgs;
using namespace cfgs::asp;
using namespace cfgs::solver;

namespace {

const Solver& married_solver() {
    static const Solver s(complete(compile(testing::married_spec())));
    return s;
}

void leaves(const DerivationNode& n, std::vector<const DerivationNode*>& out) {
    if (n.children.empty()) out.push_back(&n);
    for (const auto& c : n.children) leaves(c, out);
}

std::size_t count_via(const DerivationNode& n, DerivationNode::Via via) {
    std::size_t k = n.via == via;
    for (const auto& c : n.children) k += count_via(c, via);
    return k;
}

}  // namespace

TEST_CASE("numeric sets stay normalized", "[domain]") {
    const auto a = NumericSet::from_intervals({{5, 7}, {1, 3}, {4, 4}, {10, 12}});
    REQUIRE(a.intervals().size() == 2);
    CHECK(a.intervals()[0] == Interval{1, 7});
    CHECK(a.intervals()[1] == Interval{10, 12});
    CHECK(a.size() == 10);
    CHECK(a.without(4).str() == "[1,3] ∪ [5,7] ∪ [10,12]");
    CHECK(a.intersect(NumericSet::range(6, 11)).str() == "[6,7] ∪ [10,11]");
    CHECK(a.unite(NumericSet::range(8, 9)) == NumericSet::range(1, 12));
    CHECK(NumericSet::range(17, 90).at_least(31) == NumericSet::range(31, 90));
    CHECK(NumericSet::range(17, 90).at_most(10).empty());
    CHECK(NumericSet::all().str() == "[-inf,inf]");
    CHECK(a.nearest(8) == 7);
    CHECK(a.nearest(9) == 10);
    CHECK(NumericSet::range(5, 2).empty());
}

TEST_CASE("symbol sets keep declared order", "[domain]") {
    const SymbolSet s({"husband", "wife", "unmarried"});
    CHECK(s.without("wife").values() == std::vector<std::string>{"husband", "unmarried"});
    CHECK(s.intersect(SymbolSet({"unmarried", "husband"})).values() == std::vector<std::string>{"husband", "unmarried"});
    CHECK(s.str() == "{husband,wife,unmarried}");
}

TEST_CASE("unify", "[unify]") {
    const auto x = Term::var("X");
    auto s = unify(x, Term::sym("husband"));
    REQUIRE(s);
    CHECK(s->apply(x) == Term::sym("husband"));
    CHECK_FALSE(unify(Term::sym("husband"), Term::sym("wife")));

    Substitution ranged;
    ranged.bindings["X"] = NumericSet::range(17, 90);
    CHECK_FALSE(unify(x, Term::integer(7), ranged));
    const auto in = unify(x, Term::integer(40), ranged);
    REQUIRE(in);
    CHECK(in->apply(x) == Term::integer(40));

    // Symmetric.
    CHECK(unify(Term::sym("a"), x) == unify(x, Term::sym("a")));
    const auto f1 = Term::compound("f", {x, Term::sym("b")});
    const auto f2 = Term::compound("f", {Term::sym("a"), Term::var("Y")});
    const auto fs = unify(f1, f2);
    REQUIRE(fs);
    CHECK(fs->apply(f1) == fs->apply(f2));
    CHECK(fs->apply(fs->apply(f1)) == fs->apply(f1));
    CHECK_FALSE(unify(f1, Term::compound("g", {x, Term::sym("b")})));
}

TEST_CASE("assert_constraint narrows sets", "[constraint]") {
    const auto x = Term::var("X");
    Substitution s;
    s.bindings["X"] = NumericSet::range(17, 90);
    const auto gt = assert_constraint({CmpOp::Gt, x, Term::integer(30)}, s);
    REQUIRE(gt);
    CHECK(std::get<NumericSet>(*gt->find("X")) == NumericSet::range(31, 90));
    CHECK_FALSE(assert_constraint({CmpOp::Le, x, Term::integer(10)}, s));

    Substitution g;
    g.bindings["Y"] = SymbolSet({"male", "female"});
    const auto ne = assert_constraint({CmpOp::Neq, Term::var("Y"), Term::sym("female")}, g);
    REQUIRE(ne);
    const auto* y = ne->find("Y");
    REQUIRE(y);
    if (const auto* set = std::get_if<SymbolSet>(y))
        CHECK(set->values() == std::vector<std::string>{"male"});
    else
        CHECK(std::get<Term>(*y) == Term::sym("male"));

    CHECK_THROWS_AS(assert_constraint({CmpOp::Gt, Term::sym("a"), Term::integer(1)}), TypeMismatch);
    CHECK_THROWS_AS(assert_constraint({CmpOp::Le, Term::var("Y"), Term::integer(1)}, g), TypeMismatch);
}

TEST_CASE("married query answers in clause order", "[solve]") {
    const auto answers = married_solver().solve("married(A)");
    REQUIRE(answers.size() == 2);
    CHECK(answers[0].substitution.apply(Term::var("A")) == Term::sym("husband"));
    CHECK(answers[1].substitution.apply(Term::var("A")) == Term::sym("wife"));
    // The oracle agrees on every relationship value.
    const auto program = compile(testing::married_spec());
    for (const char* v : {"husband", "wife", "unmarried"}) {
        const bool expected = oracle::ground_truth(program, Atom{"married", {Term::sym(v)}, false});
        CHECK(married_solver().holds(parse_query(std::string("married(") + v + ")")) == expected);
    }
}

TEST_CASE("ground queries", "[solve]") {
    const auto a = married_solver().solve("f_domain(age, 25)");
    REQUIRE(a.size() == 1);
    CHECK(a[0].substitution.bindings.empty());
    CHECK(married_solver().solve("f_domain(age, 16)").empty());
    CHECK(married_solver().solve("not lite_married(unmarried)").size() == 1);
    CHECK(married_solver().solve("not lite_married(husband)").empty());
}

TEST_CASE("set-valued answers", "[solve]") {
    const auto a = married_solver().solve("f_domain(age, X), X #> 30");
    REQUIRE(a.size() == 1);
    CHECK(std::get<NumericSet>(*a[0].substitution.find("X")) == NumericSet::range(31, 90));

    const auto r = married_solver().solve("pre_realistic(husband, B, C)");
    REQUIRE(r.size() == 1);
    CHECK(r[0].substitution.apply(Term::var("B")) == Term::sym("male"));
    CHECK(std::get<NumericSet>(*r[0].substitution.find("C")) == NumericSet::range(17, 90));
}

TEST_CASE("limit stops the stream", "[solve]") {
    SolveOptions opt;
    opt.limit = 1;
    CHECK(married_solver().solve("married(A)", opt).size() == 1);
    std::size_t seen = 0;
    married_solver().solve(parse_query("f_domain(relationship, R)"), {}, [&](const Answer&) { return ++seen < 2; });
    CHECK(seen == 2);
}

TEST_CASE("unknown predicates are reported", "[solve]") {
    CHECK_THROWS_AS(married_solver().solve("nosuch(A)"), UnknownPredicateError);
}

TEST_CASE("step budget guards runaway recursion", "[solve]") {
    const Solver s(complete(parse_program(
        "f_domain(n,X) :- X #>= 0, X #=< 100000.\n"
        "n(0).\n"
        "n(Y) :- f_domain(n,Y), f_domain(n,X), X #= Y-1, n(X).")));
    SolveOptions opt;
    opt.step_budget = 500;
    CHECK(s.holds(parse_query("n(5)")));
    CHECK_THROWS_AS(s.solve("n(100000)", opt), DepthLimitExceeded);
}

TEST_CASE("traces", "[trace]") {
    SolveOptions opt;
    opt.trace = true;

    const auto m = married_solver().solve("married(husband)", opt);
    REQUIRE(m.size() == 1);
    const auto& root = trace(m[0]);
    CHECK(to_string(root.goal) == "married(husband)");
    CHECK(root.via == DerivationNode::Via::Rule);
    CHECK(root.children.size() == 3);  // body literals of the married rule
    const auto lite = std::find_if(root.children.begin(), root.children.end(),
                                   [](const auto& c) { return to_string(c.goal) == "lite_married(husband)"; });
    REQUIRE(lite != root.children.end());
    CHECK(lite->rule == "lite_married(A) :- A = husband.");

    const auto f = married_solver().solve("f_domain(gender, male)", opt);
    REQUIRE(f.size() == 1);
    CHECK(trace(f[0]).children.empty());
    CHECK(trace(f[0]).via == DerivationNode::Via::Fact);

    const auto d = married_solver().solve("not lite_married(unmarried)", opt);
    REQUIRE(d.size() == 1);
    const auto& dn = trace(d[0]);
    CHECK(dn.via == DerivationNode::Via::Dual);
    std::vector<const DerivationNode*> ls;
    leaves(dn, ls);
    REQUIRE(ls.size() == 2);
    for (const auto* l : ls) {
        CHECK(l->via == DerivationNode::Via::Constraint);
        CHECK(std::get<CmpLit>(l->goal).op == CmpOp::Neq);
    }
    CHECK(count_via(dn, DerivationNode::Via::Dual) >= 1);
    CHECK_FALSE(render(dn).empty());

    const auto untraced = married_solver().solve("married(husband)");
    CHECK_THROWS_AS(trace(untraced[0]), TraceUnavailable);
}

TEST_CASE("answers are sound under ground evaluation", "[solve][property]") {
    // Instantiate every set-valued binding at up to ten members and check the
    // query under the independent evaluator.
    const auto spec = testing::married_spec();
    const auto program = compile(spec);
    const std::pair<const char*, bool> queries[] = {{"pre_realistic(A,B,C)", false},
                                                    {"post_realistic(A,B,C), cf_married(A)", true}};
    for (const auto& [q, cf] : queries) {
        const auto query = parse_query(q);
        for (const auto& ans : married_solver().solve(query)) {
            for (int k = 0; k < 10; ++k) {
                auto pick = [&](const std::string& v) {
                    const auto* b = ans.substitution.find(v);
                    REQUIRE(b);
                    if (const auto* n = std::get_if<NumericSet>(b)) return Term::integer(n->min() + k * (n->max() - n->min()) / 9);
                    if (const auto* s = std::get_if<SymbolSet>(b)) return Term::sym(s->values()[k % s->size()]);
                    return ans.substitution.apply(Term::var(v));
                };
                const auto a = pick("A"), b = pick("B"), c = pick("C");
                CHECK(oracle::ground_truth(program, Atom{cf ? "post_realistic" : "pre_realistic", {a, b, c}, false}));
                if (cf) CHECK(oracle::ground_truth(program, Atom{"cf_married", {a}, false}));
            }
        }
    }
}

TEST_CASE("two runs give identical answer sequences", "[solve][property]") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto spec = testing::random_spec(seed);
        const Solver s(complete(compile(spec)));
        std::string vars;
        for (std::size_t i = 0; i < spec.features.size(); ++i) vars += (i ? "," : "") + pre_var(i);
        const auto q = "pre_realistic(" + vars + ")";
        auto render_all = [&] {
            std::vector<std::string> out;
            for (const auto& a : s.solve(q)) out.push_back(a.substitution.str());
            return out;
        };
        CHECK(render_all() == render_all());
    }
}
