#include "cfgs/asp/parser.hpp"
#include "cfgs/asp/serialize.hpp"
#include "cfgs/compile.hpp"
#include "cfgs/engine.hpp"
#include "cfgs/errors.hpp"
#include "cfgs/oracle/oracle.hpp"
#include "cfgs/service/document.hpp"
#include "support/random_spec.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace cfgs;
using testing::married_spec;

namespace {

using Pairs = std::vector<std::pair<std::string, std::string>>;

const Engine& married() {
    static const Engine e(married_spec());
    return e;
}

Instance inst(const ProblemSpec& spec, const Pairs& v) { return make_instance(spec, v); }

Instance married_inst(const char* rel, const char* gender, const char* age) {
    return inst(married_spec(), {{"relationship", rel}, {"gender", gender}, {"age", age}});
}

ProblemSpec fixture(const std::string& name) {
    return service::load_spec_file(std::string(CFGS_FIXTURES) + "/" + name + ".spec").spec;
}

std::size_t count_lines_starting(const std::string& text, const std::string& prefix) {
    std::size_t n = 0, pos = 0;
    while (pos < text.size()) {
        if (text.compare(pos, prefix.size(), prefix) == 0) ++n;
        pos = text.find('\n', pos);
        if (pos == std::string::npos) break;
        ++pos;
    }
    return n;
}

const asp::Rule& rule_for(const asp::Program& p, const std::string& pred) {
    for (const auto& r : p.rules())
        if (r.head.pred == pred) return r;
    throw std::runtime_error("no rule for " + pred);
}

}  // namespace

TEST_CASE("running example compiles to the expected rule shapes", "[compile]") {
    const auto text = married().program_text();
    CHECK(count_lines_starting(text, "f_domain(relationship,") == 3);
    CHECK(text.find("f_domain(relationship,husband).\n") != std::string::npos);
    CHECK(text.find("f_domain(age,X) :- X #>= 17, X #=< 90.\n") != std::string::npos);
    CHECK(text.find("lite_married(A) :- A = husband.\nlite_married(A) :- A = wife.\n") != std::string::npos);
    CHECK(text.find("measure(Z1,Z2,Z3,X) :- f_domain(restrict_C,Z1), f_domain(restrict_C,Z2), f_domain(restrict_N,Z3), "
                    "Q3 #= Z3*Z3, X #= Z1+Z2+Q3.") != std::string::npos);
    CHECK(text.find("refined(original(A,B,C),id(Z1,Z2,Z3),counterfactual(A1,B1,C1),X) :- ") != std::string::npos);
    // The text is a valid program equal to the compiled one.
    CHECK(asp::parse_program(text) == married().compiled().program);
}

TEST_CASE("counterfactual rule negates the decision component", "[compile]") {
    CHECK(asp::to_string(build_counterfactual_rule(married_spec())) ==
          "cf_married(A1) :- f_domain(relationship,A1), post_relationship(A1), not lite_married(A1).");

    // Single-clause titanic decision: only sex is read.
    auto titanic = fixture("titanic_foldse");
    titanic.decision.clauses.resize(1);
    CHECK(asp::to_string(build_counterfactual_rule(titanic)) ==
          "cf_perished(A1) :- f_domain(sex,A1), post_sex(A1), not lite_perished(A1).");
}

TEST_CASE("auxiliary predicates keep their definitions", "[compile]") {
    const auto voting = fixture("voting_foldse");
    const auto compiled = compile_spec(voting);
    const auto cf = build_counterfactual_rule(voting);
    std::size_t nafs = 0;
    for (const auto& l : cf.body)
        if (const auto* n = std::get_if<asp::NafLit>(&l)) {
            ++nafs;
            CHECK(n->atom.pred == "lite_republican");
        }
    CHECK(nafs == 1);
    CHECK(asp::to_string(rule_for(compiled.program, "ab2")) == "ab2(A,B,C,D,E) :- D = y, E \\= n, not ab1(A,B,C,D,E).");

    // cf_republican flips the decision on every one of the 32 ground votes.
    const auto grid = oracle::GroundGrid::exact(voting);
    REQUIRE(grid.cardinality() == 32);
    for (std::uint64_t i = 0; i < grid.cardinality(); ++i) {
        const auto g = grid.at(i);
        asp::Atom atom{"cf_republican", {}, false};
        for (const auto& v : g.values) atom.args.push_back(asp::Term::sym(std::get<std::string>(v)));
        CHECK(oracle::ground_truth(compiled.program, atom) == !oracle::decision_holds(voting, g));
    }
}

TEST_CASE("without causal rules the realistic rules hold only domains and properties", "[compile]") {
    auto spec = married_spec();
    spec.causal_rules.clear();
    const auto p = compile(spec);
    for (const char* pred : {"pre_realistic", "post_realistic"}) {
        const auto& r = rule_for(p, pred);
        CHECK(r.body.size() == 2 * spec.features.size());
        for (const auto& l : r.body) {
            const auto* pos = std::get_if<asp::PosLit>(&l);
            REQUIRE(pos);
            const auto& name = pos->atom.pred;
            const bool ok = name == "f_domain" || name.rfind(std::string(pred).substr(0, 4), 0) == 0;
            CHECK(ok);
        }
    }
    const auto full = compile(married_spec());
    CHECK(asp::to_string(rule_for(full, "pre_realistic").body.back()) == "causal_relationship_gender(A,B)");
}

TEST_CASE("spec validation names the field", "[compile][validation]") {
    auto expect_field = [](ProblemSpec s, const std::string& field) {
        try {
            compile(s);
            FAIL("expected SpecValidationError for " << field);
        } catch (const SpecValidationError& e) {
            CHECK(e.field() == field);
        }
    };
    auto s = married_spec();
    s.features[2].kind = Numeric{90, 17};
    expect_field(s, "features[2].range");

    s = married_spec();
    s.features[0].kind = Categorical{{"husband", "husband"}};
    expect_field(s, "features[0].values");

    s = married_spec();
    s.features[0].mutability = Mutability::IncreaseOnly;
    expect_field(s, "features[0].mutability");

    s = married_spec();
    s.causal_rules[0].guard_value = "nobody";
    expect_field(s, "causal_rules[0].if");

    s = married_spec();
    s.decision.clauses[1][0].subject = "height";
    expect_field(s, "decision.rules[1][0]");

    s = married_spec();
    s.decision.clauses[0][0].value = std::int64_t{3};
    expect_field(s, "decision.rules[0][0]");
}

TEST_CASE("negative cycles between auxiliary predicates", "[compile]") {
    auto s = married_spec();
    s.decision.auxiliary = {{"ab1", {{Condition::aux("ab2", true)}}}, {"ab2", {{Condition::aux("ab1", true)}}}};
    s.decision.clauses[0].push_back(Condition::aux("ab1", true));
    CHECK_THROWS_AS(compile(s), StratificationError);
}

TEST_CASE("classify", "[engine]") {
    CHECK(married().classify(married_inst("husband", "male", "40")) == Outcome::Undesired);
    CHECK(married().classify(married_inst("unmarried", "female", "25")) == Outcome::Desired);
    CHECK_THROWS_AS(married().classify(married_inst("husband", "female", "40")), UnrealisticInstance);
    CHECK_THROWS_AS(married().classify(married_inst("husband", "male", "200")), DomainError);
    CHECK_THROWS_AS(inst(married_spec(), {{"relationship", "husband"}, {"gender", "male"}}), DomainError);
    CHECK_THROWS_AS(married().classify(married_inst("king", "male", "40")), DomainError);
    for (const char* rel : {"husband", "wife", "unmarried"})
        for (const char* g : {"male", "female"})
            for (const char* age : {"17", "50", "90"}) {
                const auto i = married_inst(rel, g, age);
                if (!oracle::satisfies_causal(married_spec(), i)) continue;
                CHECK(married().classify(i) == oracle::brute_classify(married_spec(), i));
            }
}

TEST_CASE("enumeration of the running example", "[engine]") {
    CHECK(testing::printed(married().enumerate_undesired()) ==
          std::set<std::string>{"(husband, male, [17,90])", "(wife, female, [17,90])"});
    const auto cf = married().enumerate_counterfactuals();
    CHECK(testing::printed(cf) == std::set<std::string>{"(unmarried, male, [17,90])", "(unmarried, female, [17,90])"});
    for (const auto& i : cf) {
        CHECK_FALSE(contains(i.values[0], std::string("husband")));
        CHECK_FALSE(contains(i.values[0], std::string("wife")));
    }
    CHECK(married().enumerate_undesired(1).size() == 1);

    auto empty = married_spec();
    empty.decision.clauses.clear();
    CHECK(Engine(empty).enumerate_undesired().empty());
}

TEST_CASE("adult enumeration respects the decision thresholds", "[engine]") {
    const Engine adult(fixture("adult_foldse"));
    const auto& s = adult.spec();
    const auto ms = *s.index_of("marital_status"), cg = *s.index_of("capital_gain"), ed = *s.index_of("education_num");
    auto max_of = [](const Value& v) {
        if (const auto* n = std::get_if<solver::NumericSet>(&v)) return n->max();
        return std::get<std::int64_t>(v);
    };
    auto min_of = [](const Value& v) {
        if (const auto* n = std::get_if<solver::NumericSet>(&v)) return n->min();
        return std::get<std::int64_t>(v);
    };
    const auto undesired = adult.enumerate_undesired();
    REQUIRE_FALSE(undesired.empty());
    for (const auto& i : undesired) {
        const bool married = contains(i.values[ms], std::string("married_civ_spouse"));
        const bool first = !married && max_of(i.values[cg]) <= 6849;
        const bool second = married && to_string(i.values[ms]) == "married_civ_spouse" && max_of(i.values[cg]) <= 5013 &&
                            max_of(i.values[ed]) <= 12;
        CHECK((first || second));
    }
    bool found = false;
    for (const auto& i : adult.enumerate_counterfactuals())
        found = found || (min_of(i.values[cg]) == 6850 && max_of(i.values[cg]) == 99999);
    CHECK(found);
}

TEST_CASE("check_restriction", "[restriction]") {
    using S = Scalar;
    CHECK(check_restriction(false, S{"husband"}, S{"husband"}, Code::Zero));
    CHECK(check_restriction(true, S{std::int64_t{30}}, S{std::int64_t{35}}, Code::One));
    CHECK_FALSE(check_restriction(false, S{"husband"}, S{"husband"}, Code::One));
    CHECK(check_restriction(false, S{"husband"}, S{"wife"}, Code::One));
    CHECK(check_restriction(true, S{std::int64_t{35}}, S{std::int64_t{30}}, Code::MinusOne));
    CHECK_FALSE(check_restriction(true, S{std::int64_t{30}}, S{std::int64_t{30}}, Code::One));
    CHECK_FALSE(check_restriction(true, S{std::int64_t{30}}, S{std::int64_t{31}}, Code::Zero));
    CHECK_THROWS_AS(check_restriction(false, S{"a"}, S{"b"}, Code::MinusOne), IllegalCode);
    CHECK(observed_code(true, S{std::int64_t{3}}, S{std::int64_t{1}}) == Code::MinusOne);
    CHECK(observed_code(false, S{"a"}, S{"b"}) == Code::One);
}

TEST_CASE("cost", "[cost]") {
    const std::vector<bool> kinds{false, false, true};
    CHECK(cost({Code::Zero, Code::Zero, Code::Zero}, kinds) == 0);
    CHECK(cost({Code::One, Code::One, Code::One}, kinds) == 3);
    CHECK(cost({Code::One, Code::Zero, Code::MinusOne}, kinds) == 2);
    CHECK_THROWS_AS(cost({Code::Free, Code::Zero, Code::Zero}, kinds), UnresolvedCode);
    CHECK_THROWS_AS(cost({Code::MinusOne, Code::Zero, Code::Zero}, kinds), IllegalCode);
    CHECK(cost(married_spec(), {Code::One, Code::Zero, Code::One}) == 2);
}

TEST_CASE("restriction codes and mutability", "[restriction]") {
    CHECK(parse_code("free") == Code::Free);
    CHECK(parse_code("-1") == Code::MinusOne);
    CHECK_THROWS_AS(parse_code("2"), IllegalCode);
    CHECK(married().allowed_codes(0, std::nullopt) == std::vector<Code>{Code::Zero, Code::One});
    CHECK(married().allowed_codes(2, std::nullopt) == std::vector<Code>{Code::Zero, Code::One, Code::MinusOne});
    CHECK(married().allowed_codes(2, Code::Free) == std::vector<Code>{Code::Zero, Code::One, Code::MinusOne});
    CHECK(married().allowed_codes(2, Code::MinusOne) == std::vector<Code>{Code::MinusOne});
    CHECK_THROWS_AS(married().allowed_codes(0, Code::MinusOne), IllegalCode);

    auto s = married_spec();
    s.features[1].mutability = Mutability::Immutable;
    s.features[2].mutability = Mutability::IncreaseOnly;
    const Engine e(s);
    CHECK(e.allowed_codes(1, std::nullopt) == std::vector<Code>{Code::Zero});
    CHECK(e.allowed_codes(2, std::nullopt) == std::vector<Code>{Code::Zero, Code::One});
    // An explicit request overrides the default.
    CHECK(e.allowed_codes(1, Code::One) == std::vector<Code>{Code::One});
}

TEST_CASE("explain the running example", "[explain]") {
    const auto r = married().explain(married_inst("husband", "male", "40"),
                                     make_restrictions(married_spec(), {{"gender", "0"}, {"age", "0"}}));
    REQUIRE(r.pairs.size() == 1);
    const auto& p = r.pairs[0];
    CHECK(p.counterfactual.str() == "(unmarried, male, 40)");
    CHECK(p.codes == std::vector<Code>{Code::One, Code::Zero, Code::Zero});
    CHECK(p.cost == 1);
    CHECK(p.original == married_inst("husband", "male", "40"));

    CHECK_THROWS_AS(married().explain(married_inst("unmarried", "male", "40"), RestrictionVector::defaults(married_spec())),
                    NotUndesired);
    CHECK_THROWS_AS(married().explain(married_inst("husband", "female", "40"), RestrictionVector::defaults(married_spec())),
                    UnrealisticInstance);
}

TEST_CASE("explain ranks by cost", "[explain]") {
    const auto r = married().explain(married_inst("husband", "male", "40"), RestrictionVector::defaults(married_spec()));
    REQUIRE(r.pairs.size() > 1);
    for (std::size_t i = 1; i < r.pairs.size(); ++i) CHECK(r.pairs[i - 1].cost <= r.pairs[i].cost);
    CHECK(r.pairs.front().cost == 1);

    ExplainOptions minimal;
    minimal.minimal_only = true;
    for (const auto& p : married().explain(married_inst("husband", "male", "40"), RestrictionVector::defaults(married_spec()), minimal).pairs)
        CHECK(p.cost == 1);

    ExplainOptions limited;
    limited.limit = 2;
    CHECK(married().explain(married_inst("husband", "male", "40"), RestrictionVector::defaults(married_spec()), limited).pairs.size() == 2);
}

TEST_CASE("infeasible restrictions", "[explain]") {
    const auto fixed = make_restrictions(married_spec(), {{"relationship", "0"}, {"gender", "0"}, {"age", "0"}});
    const auto r = married().explain(married_inst("husband", "male", "40"), fixed);
    CHECK(r.pairs.empty());
    REQUIRE(r.infeasible);
    CHECK(r.all_immutable);

    const auto rel_fixed = make_restrictions(married_spec(), {{"relationship", "0"}});
    const auto r2 = married().explain(married_inst("husband", "male", "40"), rel_fixed);
    CHECK(r2.pairs.empty());
    CHECK(r2.infeasible);
    CHECK_FALSE(r2.all_immutable);

    ExplainOptions zero;
    zero.cost_bound = 0;
    CHECK(married().explain(married_inst("husband", "male", "40"), RestrictionVector::defaults(married_spec()), zero).pairs.empty());

    CHECK_THROWS_AS(make_restrictions(married_spec(), {{"gender", "-1"}}), IllegalCode);
    CHECK_THROWS_AS(make_restrictions(married_spec(), {{"height", "0"}}), DomainError);
}

TEST_CASE("a one-value feature cannot be forced to change", "[explain]") {
    auto s = married_spec();
    s.features.push_back({"planet", Categorical{{"earth"}}, Mutability::Free});
    const Engine e(s);
    const auto orig = inst(s, {{"relationship", "husband"}, {"gender", "male"}, {"age", "40"}, {"planet", "earth"}});
    const auto r = e.explain(orig, make_restrictions(s, {{"planet", "1"}}));
    CHECK(r.pairs.empty());
    CHECK(r.infeasible);
}

TEST_CASE("adult never-married scenario", "[explain]") {
    const Engine adult(fixture("adult_foldse"));
    const auto& s = adult.spec();
    const auto orig = inst(s, {{"marital_status", "never_married"},
                               {"relationship", "unmarried"},
                               {"sex", "male"},
                               {"capital_gain", "777"},
                               {"education_num", "10"},
                               {"age", "25"}});
    ExplainOptions opt;
    opt.minimal_only = true;
    const auto r = adult.explain(orig, make_restrictions(s, {{"marital_status", "0"}}), opt);
    REQUIRE(r.pairs.size() == 1);
    const auto& p = r.pairs[0];
    CHECK(p.cost == 1);
    const auto cg = *s.index_of("capital_gain");
    for (std::size_t i = 0; i < s.features.size(); ++i) {
        if (i == cg)
            CHECK(std::get<solver::NumericSet>(p.counterfactual.values[i]) == solver::NumericSet::range(6850, 99999));
        else
            CHECK(p.counterfactual.values[i] == orig.values[i]);
    }
}
