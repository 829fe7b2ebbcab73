#pragma once

// Random small specs for property tests: at most 4 features, categorical
// domains of 2 to 4 values, numeric ranges of at most 20 values, and at
// most 10,000 ground instances overall.

#include "cfgs/model.hpp"
#include "cfgs/oracle/oracle.hpp"

#include <random>
#include <set>
#include <string>
#include <tuple>
#include <vector>

namespace testing {

inline cfgs::ProblemSpec married_spec() {
    using namespace cfgs;
    ProblemSpec s;
    s.metadata.dataset = "married";
    s.features = {{"relationship", Categorical{{"husband", "wife", "unmarried"}}, Mutability::Free},
                  {"gender", Categorical{{"male", "female"}}, Mutability::Free},
                  {"age", Numeric{17, 90}, Mutability::Free}};
    s.causal_rules = {{"relationship", "husband", {Condition::compare("gender", Op::Neq, std::string("female"))}},
                      {"relationship", "wife", {Condition::compare("gender", Op::Neq, std::string("male"))}}};
    s.decision.target = "married";
    s.decision.clauses = {{Condition::compare("relationship", Op::Eq, std::string("husband"))},
                          {Condition::compare("relationship", Op::Eq, std::string("wife"))}};
    return s;
}

inline cfgs::ProblemSpec random_spec(std::uint64_t seed) {
    using namespace cfgs;
    std::mt19937_64 rng(seed);
    auto pick = [&](int lo, int hi) { return static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1)) + lo; };
    static const char* names[] = {"fa", "fb", "fc", "fd"};
    static const char* syms[] = {"v0", "v1", "v2", "v3"};

    for (;;) {
        ProblemSpec s;
        s.metadata.dataset = "random" + std::to_string(seed);
        const int n = pick(2, 4);
        std::uint64_t card = 1;
        for (int i = 0; i < n; ++i) {
            FeatureSpec f;
            f.name = names[i];
            const bool numeric = i > 0 && pick(0, 1) == 0;
            if (numeric) {
                const int lo = pick(-5, 10);
                const int width = pick(2, 20);
                f.kind = Numeric{lo, lo + width - 1};
                card *= static_cast<std::uint64_t>(width);
                const int m = pick(0, 5);
                f.mutability = m == 0 ? Mutability::IncreaseOnly : m == 1 ? Mutability::DecreaseOnly : Mutability::Free;
            } else {
                Categorical c;
                const int k = pick(2, 4);
                for (int j = 0; j < k; ++j) c.values.push_back(syms[j]);
                card *= static_cast<std::uint64_t>(k);
                f.kind = c;
                f.mutability = pick(0, 7) == 0 ? Mutability::Immutable : Mutability::Free;
            }
            s.features.push_back(std::move(f));
        }
        if (card > 10'000) continue;
        // Feature 0 is always categorical.
        s.features[0].mutability = Mutability::Free;

        auto condition = [&](std::size_t i) {
            const auto& f = s.features[i];
            if (f.numeric()) {
                static const Op ops[] = {Op::Le, Op::Ge, Op::Lt, Op::Gt, Op::Eq, Op::Neq};
                const auto& r = f.range();
                const auto t = r.lo + static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(r.hi - r.lo + 1));
                return Condition::compare(f.name, ops[pick(0, 5)], t);
            }
            const auto& vals = f.categorical().values;
            return Condition::compare(f.name, pick(0, 2) == 0 ? Op::Neq : Op::Eq,
                                      vals[static_cast<std::size_t>(pick(0, static_cast<int>(vals.size()) - 1))]);
        };
        auto conjunction = [&](int max_len) {
            std::vector<Condition> out;
            const int len = pick(1, max_len);
            for (int j = 0; j < len; ++j) out.push_back(condition(static_cast<std::size_t>(pick(0, n - 1))));
            return out;
        };

        const int causal = n > 1 ? pick(0, 2) : 0;
        for (int r = 0; r < causal; ++r) {
            std::vector<std::size_t> cats;
            for (int i = 0; i < n; ++i)
                if (!s.features[i].numeric()) cats.push_back(static_cast<std::size_t>(i));
            const auto g = cats[static_cast<std::size_t>(pick(0, static_cast<int>(cats.size()) - 1))];
            const auto& vals = s.features[g].categorical().values;
            CausalRule rule{s.features[g].name, vals[static_cast<std::size_t>(pick(0, static_cast<int>(vals.size()) - 1))], {}};
            const int len = pick(1, 2);
            for (int j = 0; j < len; ++j) {
                std::size_t other = g;
                while (other == g) other = static_cast<std::size_t>(pick(0, n - 1));
                rule.constraints.push_back(condition(other));
            }
            s.causal_rules.push_back(std::move(rule));
        }

        s.decision.target = "target";
        if (pick(0, 3) == 0) s.decision.auxiliary.push_back({"ab1", {conjunction(2)}});
        const int clauses = pick(1, 3);
        for (int c = 0; c < clauses; ++c) {
            auto conj = conjunction(3);
            if (!s.decision.auxiliary.empty() && pick(0, 1) == 0) conj.push_back(Condition::aux("ab1", true));
            s.decision.clauses.push_back(std::move(conj));
        }
        return s;
    }
}

// The first `count` random specs that have at least one undesired instance.
inline std::vector<cfgs::ProblemSpec> random_specs(std::size_t count) {
    std::vector<cfgs::ProblemSpec> out;
    for (std::uint64_t seed = 1; out.size() < count; ++seed) {
        auto s = random_spec(seed);
        if (!cfgs::oracle::undesired_set(s, cfgs::oracle::GroundGrid::exact(s)).empty()) out.push_back(std::move(s));
    }
    return out;
}

// Ground expansion of symbolic instances, as a set of printed instances.
inline std::set<std::string> ground_set(const std::vector<cfgs::Instance>& answers, const cfgs::oracle::GroundGrid& grid) {
    std::set<std::string> out;
    for (const auto& a : answers)
        for (const auto& g : cfgs::oracle::expand(a, grid)) out.insert(g.str());
    return out;
}

inline std::set<std::string> printed(const std::vector<cfgs::Instance>& list) {
    std::set<std::string> out;
    for (const auto& i : list) out.insert(i.str());
    return out;
}

// (counterfactual, codes, cost) triples for set comparison.
using PairKey = std::tuple<std::string, std::vector<int>, int>;

inline std::set<PairKey> ground_pairs(const std::vector<cfgs::CounterfactualPair>& pairs,
                                      const cfgs::oracle::GroundGrid& grid) {
    std::set<PairKey> out;
    for (const auto& p : pairs) {
        std::vector<int> codes;
        for (auto c : p.codes) codes.push_back(static_cast<int>(c));
        for (const auto& g : cfgs::oracle::expand(p.counterfactual, grid)) out.emplace(g.str(), codes, p.cost);
    }
    return out;
}

}  // namespace testing
