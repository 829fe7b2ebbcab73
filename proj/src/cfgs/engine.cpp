#include "cfgs/engine.hpp"

#include "cfgs/asp/serialize.hpp"
#include "cfgs/errors.hpp"

#include <algorithm>
#include <set>

namespace cfgs {

using asp::Atom;
using asp::Literal;
using asp::NafLit;
using asp::PosLit;
using asp::Term;

namespace {

Term scalar_term(const Value& v) {
    if (const auto* s = std::get_if<std::string>(&v)) return Term::sym(*s);
    return Term::integer(std::get<std::int64_t>(v));
}

Value value_of(const solver::Binding& b, const std::string& var) {
    if (const auto* t = std::get_if<Term>(&b)) {
        if (t->is_sym()) return t->name();
        if (t->is_int()) return t->value();
        throw Error("variable " + var + " is bound to the non-scalar term " + asp::to_string(*t));
    }
    if (const auto* n = std::get_if<solver::NumericSet>(&b)) return *n;
    if (const auto* s = std::get_if<solver::SymbolSet>(&b)) return *s;
    throw Error("variable " + var + " was left unconstrained by the solver");
}

Literal pos(std::string pred, std::vector<Term> args) { return PosLit{Atom{std::move(pred), std::move(args), false}}; }

}  // namespace

Engine::Engine(ProblemSpec spec, EngineOptions options)
    : spec_(std::move(spec)), options_(options), compiled_(compile_spec(spec_)),
      solver_(asp::complete(compiled_.program)) {}

std::string Engine::program_text() const { return asp::serialize(compiled_.program); }

solver::SolveOptions Engine::solve_options(std::optional<std::size_t> limit) const {
    solver::SolveOptions o;
    o.limit = limit;
    o.step_budget = options_.step_budget;
    return o;
}

void Engine::check_domain(const Instance& instance) const {
    if (instance.values.size() != spec_.features.size())
        throw DomainError("instance has " + std::to_string(instance.values.size()) + " values, spec has " +
                          std::to_string(spec_.features.size()) + " features");
    for (std::size_t i = 0; i < spec_.features.size(); ++i) {
        const auto& f = spec_.features[i];
        const auto& v = instance.values[i];
        if (f.numeric()) {
            const auto* x = std::get_if<std::int64_t>(&v);
            if (!x) throw DomainError("feature '" + f.name + "' needs an integer value");
            if (*x < f.range().lo || *x > f.range().hi)
                throw DomainError("value " + std::to_string(*x) + " of '" + f.name + "' is outside [" +
                                  std::to_string(f.range().lo) + "," + std::to_string(f.range().hi) + "]");
        } else {
            const auto* x = std::get_if<std::string>(&v);
            if (!x) throw DomainError("feature '" + f.name + "' needs a symbolic value");
            const auto& vals = f.categorical().values;
            if (std::find(vals.begin(), vals.end(), *x) == vals.end())
                throw DomainError("value '" + *x + "' is not in the domain of '" + f.name + "'");
        }
    }
}

bool Engine::realistic(const Instance& instance) const {
    check_domain(instance);
    std::vector<Term> args;
    for (const auto& v : instance.values) args.push_back(scalar_term(v));
    return !solver_.solve({pos("pre_realistic", args)}, solve_options(1)).empty();
}

Outcome Engine::classify(const Instance& instance) const {
    if (!realistic(instance))
        throw UnrealisticInstance("instance " + instance.str() + " violates the causal rules");
    std::vector<Term> args;
    for (auto i : compiled_.decision_features) args.push_back(scalar_term(instance.values[i]));
    const bool undesired = !solver_.solve({pos(compiled_.target, args)}, solve_options(1)).empty();
    return undesired ? Outcome::Undesired : Outcome::Desired;
}

std::vector<Instance> Engine::enumerate(const std::string& head, const std::vector<std::string>& vars,
                                        std::optional<std::size_t> limit) const {
    std::vector<Term> dargs;
    for (auto i : compiled_.decision_features) dargs.push_back(Term::var(vars[i]));
    std::vector<Term> all;
    for (const auto& v : vars) all.push_back(Term::var(v));
    const bool pre = head == compiled_.target;
    const std::vector<Literal> query{pos(head, dargs), pos(pre ? "pre_realistic" : "post_realistic", all)};
    std::vector<Instance> out;
    solver_.solve(query, solve_options(limit), [&](const solver::Answer& a) {
        Instance inst;
        for (const auto& v : vars) inst.values.push_back(value_of(a.substitution.bindings.at(v), v));
        out.push_back(std::move(inst));
        return true;
    });
    return out;
}

std::vector<Instance> Engine::enumerate_undesired(std::optional<std::size_t> limit) const {
    return enumerate(compiled_.target, compiled_.pre_vars, limit);
}

std::vector<Instance> Engine::enumerate_counterfactuals(std::optional<std::size_t> limit) const {
    return enumerate("cf_" + compiled_.target, compiled_.post_vars, limit);
}

std::vector<Code> Engine::allowed_codes(std::size_t feature, const std::optional<Code>& entry) const {
    const auto& f = spec_.features.at(feature);
    const bool numeric = f.numeric();
    const std::vector<Code> any = numeric ? std::vector<Code>{Code::Zero, Code::One, Code::MinusOne}
                                          : std::vector<Code>{Code::Zero, Code::One};
    if (!entry) {
        switch (f.mutability) {
        case Mutability::Free: return any;
        case Mutability::Immutable: return {Code::Zero};
        case Mutability::IncreaseOnly: return {Code::Zero, Code::One};
        case Mutability::DecreaseOnly: return {Code::Zero, Code::MinusOne};
        }
    }
    if (*entry == Code::Free) return any;
    if (*entry == Code::MinusOne && !numeric)
        throw IllegalCode("code -1 is only defined for numeric features, not '" + f.name + "'");
    return {*entry};
}

ExplainResult Engine::explain(const Instance& original, const RestrictionVector& restrictions,
                              const ExplainOptions& options) const {
    if (classify(original) != Outcome::Undesired)
        throw NotUndesired("instance " + original.str() + " already has the desired outcome");
    const std::size_t n = spec_.features.size();
    if (restrictions.codes.size() != n)
        throw DomainError("restriction vector has " + std::to_string(restrictions.codes.size()) + " entries, spec has " +
                          std::to_string(n) + " features");

    std::vector<std::vector<Code>> changes(n);  // non-zero codes per feature
    std::vector<std::size_t> changeable, forced;
    for (std::size_t i = 0; i < n; ++i) {
        const auto codes = allowed_codes(i, restrictions.codes[i]);
        for (auto c : codes)
            if (c != Code::Zero) changes[i].push_back(c);
        if (!changes[i].empty()) changeable.push_back(i);
        if (std::find(codes.begin(), codes.end(), Code::Zero) == codes.end()) forced.push_back(i);
    }

    ExplainResult result;
    std::set<std::string> seen;
    std::vector<Term> original_terms;
    for (const auto& v : original.values) original_terms.push_back(scalar_term(v));
    std::vector<Term> post;
    for (const auto& v : compiled_.post_vars) post.push_back(Term::var(v));

    // Runs refined/4 for one fully resolved code vector. Post-world variables
    // are narrowed up front to the values their code admits, which prunes the
    // search without changing the answers.
    auto query = [&](const std::vector<Code>& codes, int level) {
        std::vector<Term> ids;
        solver::Substitution given;
        for (std::size_t i = 0; i < n; ++i) {
            ids.push_back(Term::integer(static_cast<int>(codes[i])));
            const auto& name = compiled_.post_vars[i];
            switch (codes[i]) {
            case Code::Zero: given.bindings[name] = original_terms[i]; break;
            case Code::One:
                if (spec_.features[i].numeric()) {
                    const auto v = std::get<std::int64_t>(original.values[i]);
                    given.bindings[name] = solver::NumericSet::range(v + 1, solver::NumericSet::kMax);
                } else {
                    given.bindings[name] = solver::Open{{original_terms[i]}};
                }
                break;
            case Code::MinusOne: {
                const auto v = std::get<std::int64_t>(original.values[i]);
                given.bindings[name] = solver::NumericSet::range(solver::NumericSet::kMin, v - 1);
                break;
            }
            case Code::Free: break;
            }
        }
        const std::vector<Literal> q{pos("refined", {Term::compound("original", original_terms),
                                                     Term::compound("id", ids), Term::compound("counterfactual", post),
                                                     Term::var("Cost")})};
        bool more = true;
        solver_.solve_with(q, given, solve_options(), [&](const solver::Answer& a) {
            CounterfactualPair p;
            p.original = original;
            p.codes = codes;
            for (const auto& v : compiled_.post_vars) p.counterfactual.values.push_back(value_of(a.substitution.bindings.at(v), v));
            const auto* c = std::get_if<Term>(&a.substitution.bindings.at("Cost"));
            if (!c || !c->is_int() || c->value() != level)
                throw Error("cost of " + p.counterfactual.str() + " does not match its restriction codes");
            p.cost = level;
            std::string key;
            for (auto code : codes) key += to_string(code) + ",";
            key += p.counterfactual.str();
            if (seen.insert(key).second) {
                result.pairs.push_back(std::move(p));
                if (options.limit && result.pairs.size() >= *options.limit) more = false;
            }
            return more;
        });
        return more;
    };

    const int max_cost = std::min<int>(options.cost_bound.value_or(static_cast<int>(n)), static_cast<int>(n));
    for (int level = std::max<int>(0, static_cast<int>(forced.size())); level <= max_cost; ++level) {
        const std::size_t k = static_cast<std::size_t>(level);
        if (k > changeable.size()) break;
        // Subsets of changeable features of size k, in lexicographic order.
        std::vector<std::size_t> pick(k);
        for (std::size_t j = 0; j < k; ++j) pick[j] = j;
        bool stop = false;
        for (;;) {
            std::vector<std::size_t> subset;
            for (auto j : pick) subset.push_back(changeable[j]);
            const bool covers = std::all_of(forced.begin(), forced.end(), [&](auto f) {
                return std::find(subset.begin(), subset.end(), f) != subset.end();
            });
            if (covers) {
                std::vector<std::size_t> digit(k, 0);
                for (;;) {
                    std::vector<Code> codes(n, Code::Zero);
                    for (std::size_t j = 0; j < k; ++j) codes[subset[j]] = changes[subset[j]][digit[j]];
                    if (!query(codes, level)) {
                        stop = true;
                        break;
                    }
                    std::size_t j = k;
                    while (j > 0 && ++digit[j - 1] == changes[subset[j - 1]].size()) digit[--j] = 0;
                    if (j == 0) break;
                }
            }
            if (stop) break;
            std::size_t j = k;
            while (j > 0 && pick[j - 1] == changeable.size() - k + (j - 1)) --j;
            if (j == 0) break;
            ++pick[j - 1];
            for (std::size_t m = j; m < k; ++m) pick[m] = pick[m - 1] + 1;
        }
        if (stop) break;
        if (options.minimal_only && !result.pairs.empty()) break;
    }

    if (result.pairs.empty()) {
        result.all_immutable = changeable.empty();
        result.infeasible = result.all_immutable
                                ? "every feature is restricted to code 0, so no change is possible"
                                : "no counterfactual satisfies the restrictions" +
                                      (options.cost_bound ? " within cost " + std::to_string(*options.cost_bound)
                                                          : std::string());
    }
    return result;
}

Outcome classify(const ProblemSpec& spec, const Instance& instance) { return Engine(spec).classify(instance); }

std::vector<Instance> enumerate_undesired(const ProblemSpec& spec, std::optional<std::size_t> limit) {
    return Engine(spec).enumerate_undesired(limit);
}

std::vector<Instance> enumerate_counterfactuals(const ProblemSpec& spec, std::optional<std::size_t> limit) {
    return Engine(spec).enumerate_counterfactuals(limit);
}

ExplainResult explain(const ProblemSpec& spec, const Instance& original, const RestrictionVector& restrictions,
                      const ExplainOptions& options) {
    return Engine(spec).explain(original, restrictions, options);
}

bool check_restriction(bool numeric, const Scalar& pre, const Scalar& post, Code code) {
    if (code == Code::Free) throw UnresolvedCode("restriction code is still free");
    if (code == Code::MinusOne && !numeric) throw IllegalCode("code -1 is only defined for numeric features");
    if (numeric) {
        const auto* a = std::get_if<std::int64_t>(&pre);
        const auto* b = std::get_if<std::int64_t>(&post);
        if (!a || !b) throw DomainError("numeric restriction on non-integer values");
        switch (code) {
        case Code::Zero: return *a == *b;
        case Code::One: return *a < *b;
        default: return *a > *b;
        }
    }
    return code == Code::Zero ? pre == post : pre != post;
}

Code observed_code(bool numeric, const Scalar& pre, const Scalar& post) {
    if (pre == post) return Code::Zero;
    if (!numeric) return Code::One;
    return std::get<std::int64_t>(pre) < std::get<std::int64_t>(post) ? Code::One : Code::MinusOne;
}

int cost(const std::vector<Code>& codes, const std::vector<bool>& numeric) {
    if (codes.size() != numeric.size()) throw DomainError("code vector does not match the feature count");
    int categorical = 0, squares = 0;
    for (std::size_t i = 0; i < codes.size(); ++i) {
        if (codes[i] == Code::Free) throw UnresolvedCode("restriction code " + std::to_string(i + 1) + " is still free");
        const int z = static_cast<int>(codes[i]);
        if (numeric[i]) {
            squares += z * z;
        } else {
            if (z < 0) throw IllegalCode("code -1 on categorical feature " + std::to_string(i + 1));
            categorical += z;
        }
    }
    return categorical + squares;
}

int cost(const ProblemSpec& spec, const std::vector<Code>& codes) {
    std::vector<bool> numeric;
    for (const auto& f : spec.features) numeric.push_back(f.numeric());
    return cost(codes, numeric);
}

}  // namespace cfgs
