#include "cfgs/asp/completion.hpp"
#include "cfgs/asp/parser.hpp"
#include "cfgs/asp/serialize.hpp"
#include "cfgs/compile.hpp"
#include "cfgs/errors.hpp"
#include "cfgs/oracle/oracle.hpp"
#include "cfgs/oracle/sweep.hpp"
#include "support/random_spec.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <fstream>
#include <sstream>

using namespace cfgs;
using namespace cfgs::oracle;
using asp::Atom;
using asp::Term;
using testing::married_spec;

namespace {

Instance married_inst(const char* rel, const char* gender, std::int64_t age) {
    return Instance{{std::string(rel), std::string(gender), age}};
}

}  // namespace

TEST_CASE("ground truth on the running example", "[oracle]") {
    const auto p = compile(married_spec());
    CHECK(ground_truth(p, Atom{"married", {Term::sym("husband")}, false}));
    CHECK_FALSE(ground_truth(p, Atom{"married", {Term::sym("unmarried")}, false}));
    CHECK_FALSE(ground_truth(p, Atom{"f_domain", {Term::sym("age"), Term::integer(16)}, false}));
    CHECK(ground_truth(p, Atom{"f_domain", {Term::sym("age"), Term::integer(17)}, false}));
    CHECK(ground_truth(p, Atom{"measure", {Term::integer(1), Term::integer(0), Term::integer(-1), Term::integer(2)}, false}));
    CHECK_FALSE(ground_truth(p, Atom{"measure", {Term::integer(1), Term::integer(0), Term::integer(-1), Term::integer(0)}, false}));
}

TEST_CASE("ground truth handles recursion and negation", "[oracle]") {
    const auto p = asp::parse_program(
        "e(a,b).\ne(b,c).\ne(c,a).\nn(d).\n"
        "t(X,Y) :- e(X,Y).\nt(X,Y) :- e(X,Z), t(Z,Y).\n"
        "node(X) :- e(X,Y).\nnode(X) :- n(X).\n"
        "isolated(X) :- node(X), not t(X,X).");
    CHECK(ground_truth(p, Atom{"t", {Term::sym("a"), Term::sym("a")}, false}));
    CHECK_FALSE(ground_truth(p, Atom{"t", {Term::sym("a"), Term::sym("d")}, false}));
    CHECK(ground_truth(p, Atom{"isolated", {Term::sym("d")}, false}));
    CHECK_FALSE(ground_truth(p, Atom{"isolated", {Term::sym("b")}, false}));
}

TEST_CASE("brute classification", "[oracle]") {
    const auto s = married_spec();
    CHECK(brute_classify(s, married_inst("wife", "female", 30)) == Outcome::Undesired);
    CHECK(brute_classify(s, married_inst("unmarried", "male", 30)) == Outcome::Desired);
    CHECK_THROWS_AS(brute_classify(s, married_inst("husband", "male", 200)), DomainError);
    CHECK_THROWS_AS(brute_classify(s, married_inst("husband", "female", 30)), UnrealisticInstance);
    CHECK(satisfies_causal(s, married_inst("unmarried", "female", 30)));
    CHECK_FALSE(satisfies_causal(s, married_inst("wife", "male", 30)));
}

TEST_CASE("grids", "[oracle]") {
    const auto g = GroundGrid::exact(married_spec());
    CHECK(g.cardinality() == 3 * 2 * 74);
    CHECK_FALSE(g.is_sampled());
    CHECK(g.at(0).str() == "(husband, male, 17)");
    CHECK(g.at(1).str() == "(husband, male, 18)");
    CHECK(g.at(g.cardinality() - 1).str() == "(unmarried, female, 90)");
    CHECK(realistic_set(married_spec(), g).size() == 4 * 74);
    CHECK(undesired_set(married_spec(), g).size() == 2 * 74);
    CHECK(desired_set(married_spec(), g).size() == 2 * 74);

    auto big = married_spec();
    big.features[2].kind = Numeric{0, 99999};
    CHECK_THROWS_AS(GroundGrid::exact(big), GridTooLarge);

    const auto sampled = GroundGrid::sampled(big, 100);
    CHECK(sampled.is_sampled());
    const auto& ages = sampled.values()[2];
    CHECK(ages.size() <= 110);
    CHECK(ages.front() == Scalar{std::int64_t{0}});
    CHECK(ages.back() == Scalar{std::int64_t{99999}});
    CHECK_THROWS_AS(brute_pairs(big, married_inst("husband", "male", 40), RestrictionVector::defaults(big), {}, sampled),
                    GridTooLarge);
}

TEST_CASE("sampled grids keep every threshold and its neighbours", "[oracle]") {
    auto s = married_spec();
    s.features[2].kind = Numeric{0, 99999};
    s.decision.clauses.push_back({Condition::compare("age", Op::Le, std::int64_t{6849})});
    const auto g = GroundGrid::sampled(s, 50);
    const auto& v = g.values()[2];
    for (std::int64_t t : {6848, 6849, 6850}) CHECK(std::find(v.begin(), v.end(), Scalar{t}) != v.end());
}

TEST_CASE("brute pairs on the running example", "[oracle]") {
    const auto s = married_spec();
    const auto g = GroundGrid::exact(s);
    const auto orig = married_inst("husband", "male", 40);
    const auto fixed = make_restrictions(s, {{"gender", "0"}, {"age", "0"}});
    const auto pairs = brute_pairs(s, orig, fixed, {}, g);
    REQUIRE(pairs.size() == 1);
    CHECK(pairs[0].counterfactual.str() == "(unmarried, male, 40)");
    CHECK(pairs[0].cost == 1);
    CHECK(pairs[0].codes == std::vector<Code>{Code::One, Code::Zero, Code::Zero});

    const auto none = make_restrictions(s, {{"relationship", "0"}, {"gender", "0"}, {"age", "0"}});
    CHECK(brute_pairs(s, orig, none, {}, g).empty());
    CHECK(brute_pairs(s, orig, RestrictionVector::defaults(s), 0, g).empty());
    CHECK_THROWS_AS(brute_pairs(s, married_inst("unmarried", "male", 40), fixed, {}, g), NotUndesired);

    // Every pair's cost counts the changed features.
    for (const auto& p : brute_pairs(s, orig, RestrictionVector::defaults(s), {}, g)) {
        int changed = 0;
        for (std::size_t i = 0; i < 3; ++i) changed += p.original.values[i] != p.counterfactual.values[i];
        CHECK(p.cost == changed);
    }
}

TEST_CASE("expansion of symbolic instances", "[oracle]") {
    const auto g = GroundGrid::exact(married_spec());
    const Instance sym{{solver::SymbolSet({"husband", "wife"}), std::string("male"), solver::NumericSet::range(30, 32)}};
    const auto members = expand(sym, g);
    CHECK(members.size() == 6);
    CHECK(members.front().str() == "(husband, male, 30)");
    // Unbounded sets are clipped to the grid.
    const Instance open{{std::string("wife"), std::string("female"), solver::NumericSet::range(88, solver::NumericSet::kMax)}};
    CHECK(expand(open, g).size() == 3);
}

TEST_CASE("generated ground atoms cover every signature", "[oracle]") {
    const auto s = married_spec();
    const auto compiled = compile_spec(s);
    const auto atoms = ground_atoms(s, compiled, 10'000);
    CHECK(atoms.size() <= 10'000);
    std::set<std::string> preds;
    for (const auto& a : atoms) {
        preds.insert(a.pred);
        for (const auto& t : a.args) CHECK(t.is_ground());
    }
    for (const auto& sig : compiled.signatures) CHECK(preds.count(sig.key.name) == 1);
    CHECK(ground_atoms(s, compiled, 500, 7) == ground_atoms(s, compiled, 500, 7));
    CHECK(ground_atoms(s, compiled, 500).size() <= 500);
}

TEST_CASE("oracle agrees with the dual sweep on the running example", "[oracle]") {
    const auto s = married_spec();
    const auto compiled = compile_spec(s);
    const solver::Solver solver(asp::complete(compiled.program));
    const auto atoms = ground_atoms(s, compiled, 2'000);
    CHECK(dual_violations(solver, atoms).empty());
    GroundEvaluator eval(compiled.program, {});
    for (std::size_t i = 0; i < atoms.size(); i += 7) {
        INFO(asp::to_string(atoms[i]));
        CHECK(eval.holds(atoms[i]) == solver.holds({asp::PosLit{atoms[i]}}));
    }
}

TEST_CASE("the sweep reports a broken dual", "[oracle]") {
    // A hand-made dual program whose not_p also holds where p does.
    const auto p = asp::parse_program("d(a).\nd(b).\np(X) :- d(X), X = a.");
    auto dual = asp::complete(p);
    std::vector<asp::Rule> rules = dual.duals();
    for (auto& r : rules)
        if (r.head.pred == "p") r.body.clear();
    const solver::Solver broken(asp::DualProgram(p, rules));
    const std::vector<Atom> atoms{{"p", {Term::sym("a")}, false}, {"p", {Term::sym("b")}, false}};
    const auto v = dual_violations(broken, atoms);
    REQUIRE(v.size() == 1);
    CHECK(v[0].positive);
    CHECK(v[0].negative);
    CHECK(dual_violations_serial(broken, atoms).size() == 1);
}

TEST_CASE("parallel kernels match the serial ones", "[oracle][parallel]") {
    for (std::uint64_t seed = 1; seed <= 12; ++seed) {
        const auto s = testing::random_spec(seed);
        const auto g = GroundGrid::exact(s);
        INFO("seed " << seed);
        const auto undesired = undesired_set(s, g);
        CHECK(undesired == undesired_set_serial(s, g));
        if (!undesired.empty()) {
            const auto& orig = undesired[undesired.size() / 2];
            CHECK(brute_pairs(s, orig, RestrictionVector::defaults(s), {}, g) ==
                  brute_pairs_serial(s, orig, RestrictionVector::defaults(s), {}, g));
        }
        const auto compiled = compile_spec(s);
        const solver::Solver solver(asp::complete(compiled.program));
        const auto atoms = ground_atoms(s, compiled, 300, seed);
        const auto a = dual_violations(solver, atoms), b = dual_violations_serial(solver, atoms);
        CHECK(a.size() == b.size());
        CHECK(a.empty());
    }
}

TEST_CASE("oracle sources stay independent of the engine", "[oracle]") {
    for (const char* file : {"src/oracle/oracle.cpp", "src/oracle/ground.cpp"}) {
        std::ifstream in(std::string(CFGS_FIXTURES) + "/../" + file);
        REQUIRE(in);
        std::stringstream ss;
        ss << in.rdbuf();
        const auto text = ss.str();
        for (const char* banned : {"cfgs/solver/", "cfgs/engine.hpp", "asp/completion.hpp", "asp/parser.hpp"}) {
            INFO(file << " includes " << banned);
            CHECK(text.find(banned) == std::string::npos);
        }
        CHECK(text.find("compile_spec(") == std::string::npos);
    }
}
