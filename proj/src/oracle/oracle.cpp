#include "cfgs/oracle/oracle.hpp"

#include "cfgs/errors.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <set>

#ifdef CFGS_HAVE_OPENMP
#include <omp.h>
#endif

namespace cfgs::oracle {

namespace {

std::uint64_t saturating_mul(std::uint64_t a, std::uint64_t b) {
    if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a) return std::numeric_limits<std::uint64_t>::max();
    return a * b;
}

// Integer thresholds mentioned anywhere for one feature.
std::set<std::int64_t> thresholds(const ProblemSpec& spec, const std::string& feature) {
    std::set<std::int64_t> out;
    auto scan = [&](const std::vector<Condition>& conds) {
        for (const auto& c : conds)
            if (!c.auxiliary && c.subject == feature)
                if (const auto* v = std::get_if<std::int64_t>(&c.value)) out.insert(*v);
    };
    for (const auto& clause : spec.decision.clauses) scan(clause);
    for (const auto& aux : spec.decision.auxiliary)
        for (const auto& clause : aux.clauses) scan(clause);
    for (const auto& rule : spec.causal_rules) scan(rule.constraints);
    return out;
}

class Evaluator {
public:
    Evaluator(const ProblemSpec& spec, const Instance& instance) : spec_(spec), instance_(instance) {}

    bool all(const std::vector<Condition>& conds) {
        return std::all_of(conds.begin(), conds.end(), [&](const Condition& c) { return holds(c); });
    }

    bool holds(const Condition& c) {
        if (c.auxiliary) return aux(c.subject) != c.negated;
        const auto idx = spec_.index_of(c.subject);
        if (!idx) throw DomainError("unknown feature '" + c.subject + "'");
        const auto& v = instance_.values.at(*idx);
        if (const auto* x = std::get_if<std::int64_t>(&v)) {
            const auto* t = std::get_if<std::int64_t>(&c.value);
            if (!t) return c.op == Op::Neq;
            switch (c.op) {
            case Op::Eq: return *x == *t;
            case Op::Neq: return *x != *t;
            case Op::Le: return *x <= *t;
            case Op::Ge: return *x >= *t;
            case Op::Lt: return *x < *t;
            case Op::Gt: return *x > *t;
            }
        }
        const auto* s = std::get_if<std::string>(&v);
        if (!s) throw DomainError("instance is not ground");
        const auto* t = std::get_if<std::string>(&c.value);
        if (c.op == Op::Eq) return t && *s == *t;
        if (c.op == Op::Neq) return !t || *s != *t;
        throw TypeMismatch("ordered comparison on categorical feature '" + c.subject + "'");
    }

    bool aux(const std::string& name) {
        if (auto it = memo_.find(name); it != memo_.end()) {
            if (it->second < 0) throw DepthLimitExceeded("auxiliary predicate '" + name + "' depends on itself");
            return it->second == 1;
        }
        const AuxPredicate* def = nullptr;
        for (const auto& a : spec_.decision.auxiliary)
            if (a.name == name) def = &a;
        if (!def) throw DomainError("unknown auxiliary predicate '" + name + "'");
        memo_[name] = -1;
        bool result = false;
        for (const auto& clause : def->clauses)
            if (all(clause)) {
                result = true;
                break;
            }
        memo_[name] = result ? 1 : 0;
        return result;
    }

private:
    const ProblemSpec& spec_;
    const Instance& instance_;
    std::map<std::string, int> memo_;
};

void check_domain(const ProblemSpec& spec, const Instance& instance) {
    if (instance.values.size() != spec.features.size())
        throw DomainError("instance has " + std::to_string(instance.values.size()) + " values, spec has " +
                          std::to_string(spec.features.size()) + " features");
    for (std::size_t i = 0; i < spec.features.size(); ++i) {
        const auto& f = spec.features[i];
        const auto& v = instance.values[i];
        if (f.numeric()) {
            const auto* x = std::get_if<std::int64_t>(&v);
            if (!x || *x < f.range().lo || *x > f.range().hi)
                throw DomainError("value " + to_string(v) + " is outside the domain of '" + f.name + "'");
        } else {
            const auto* x = std::get_if<std::string>(&v);
            const auto& vals = f.categorical().values;
            if (!x || std::find(vals.begin(), vals.end(), *x) == vals.end())
                throw DomainError("value " + to_string(v) + " is outside the domain of '" + f.name + "'");
        }
    }
}

std::vector<Code> allowed(const FeatureSpec& f, const std::optional<Code>& entry) {
    const bool numeric = f.numeric();
    std::vector<Code> any{Code::Zero, Code::One};
    if (numeric) any.push_back(Code::MinusOne);
    if (!entry) {
        switch (f.mutability) {
        case Mutability::Free: return any;
        case Mutability::Immutable: return {Code::Zero};
        case Mutability::IncreaseOnly: return {Code::Zero, Code::One};
        case Mutability::DecreaseOnly: return {Code::Zero, Code::MinusOne};
        }
    }
    if (*entry == Code::Free) return any;
    if (*entry == Code::MinusOne && !numeric) throw IllegalCode("code -1 on categorical feature '" + f.name + "'");
    return {*entry};
}

Code code_between(const Value& pre, const Value& post) {
    if (const auto* a = std::get_if<std::int64_t>(&pre)) {
        const auto b = std::get<std::int64_t>(post);
        return b > *a ? Code::One : b < *a ? Code::MinusOne : Code::Zero;
    }
    return pre == post ? Code::Zero : Code::One;
}

// Flags grid points matching `pred`, in parallel when available, and collects
// them in grid order.
template <class Pred>
std::vector<Instance> select(const GroundGrid& grid, Pred pred, bool parallel) {
    const auto n = static_cast<std::int64_t>(grid.cardinality());
    std::vector<std::uint8_t> keep(static_cast<std::size_t>(n), 0);
    if (parallel) {
#ifdef CFGS_HAVE_OPENMP
#pragma omp parallel for schedule(dynamic, 256)
#endif
        for (std::int64_t i = 0; i < n; ++i) keep[i] = pred(grid.at(static_cast<std::uint64_t>(i))) ? 1 : 0;
    } else {
        for (std::int64_t i = 0; i < n; ++i) keep[i] = pred(grid.at(static_cast<std::uint64_t>(i))) ? 1 : 0;
    }
    std::vector<Instance> out;
    for (std::int64_t i = 0; i < n; ++i)
        if (keep[i]) out.push_back(grid.at(static_cast<std::uint64_t>(i)));
    return out;
}

std::vector<CounterfactualPair> pairs_impl(const ProblemSpec& spec, const Instance& original,
                                           const RestrictionVector& restrictions, std::optional<int> cost_bound,
                                           const GroundGrid& grid, bool parallel) {
    if (grid.is_sampled()) throw GridTooLarge("counterfactual pairs need an exact grid");
    if (brute_classify(spec, original) != Outcome::Undesired)
        throw NotUndesired("instance " + original.str() + " already has the desired outcome");
    const std::size_t n = spec.features.size();
    if (restrictions.codes.size() != n) throw DomainError("restriction vector length does not match the spec");
    std::vector<std::vector<Code>> ok(n);
    for (std::size_t i = 0; i < n; ++i) ok[i] = allowed(spec.features[i], restrictions.codes[i]);

    auto admissible = [&](const Instance& c) {
        int changed = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const auto code = code_between(original.values[i], c.values[i]);
            if (std::find(ok[i].begin(), ok[i].end(), code) == ok[i].end()) return false;
            changed += code != Code::Zero;
        }
        if (cost_bound && changed > *cost_bound) return false;
        return satisfies_causal(spec, c) && !decision_holds(spec, c);
    };
    std::vector<CounterfactualPair> out;
    for (auto& c : select(grid, admissible, parallel)) {
        CounterfactualPair p;
        p.original = original;
        for (std::size_t i = 0; i < n; ++i) {
            p.codes.push_back(code_between(original.values[i], c.values[i]));
            p.cost += p.codes.back() != Code::Zero;
        }
        p.counterfactual = std::move(c);
        out.push_back(std::move(p));
    }
    return out;
}

}  // namespace

GroundGrid GroundGrid::exact(const ProblemSpec& spec, std::uint64_t cap) {
    GroundGrid g;
    for (const auto& f : spec.features) {
        std::uint64_t size = f.numeric() ? static_cast<std::uint64_t>(f.range().hi - f.range().lo + 1)
                                         : f.categorical().values.size();
        g.cardinality_ = saturating_mul(g.cardinality_, size);
    }
    if (g.cardinality_ > cap)
        throw GridTooLarge("exact grid would have " + std::to_string(g.cardinality_) + " points, cap is " +
                           std::to_string(cap));
    for (const auto& f : spec.features) {
        std::vector<Scalar> vals;
        if (f.numeric())
            for (auto v = f.range().lo; v <= f.range().hi; ++v) vals.emplace_back(v);
        else
            for (const auto& v : f.categorical().values) vals.emplace_back(v);
        g.values_.push_back(std::move(vals));
    }
    return g;
}

GroundGrid GroundGrid::sampled(const ProblemSpec& spec, std::size_t max_numeric) {
    GroundGrid g;
    for (const auto& f : spec.features) {
        std::vector<Scalar> vals;
        if (f.numeric()) {
            const auto lo = f.range().lo, hi = f.range().hi;
            const auto width = static_cast<std::uint64_t>(hi - lo) + 1;
            if (width <= max_numeric) {
                for (auto v = lo; v <= hi; ++v) vals.emplace_back(v);
            } else {
                g.sampled_ = true;
                std::set<std::int64_t> picks;
                const auto stride = static_cast<std::int64_t>((width + max_numeric - 1) / max_numeric);
                for (auto v = lo; v <= hi; v += stride) picks.insert(v);
                picks.insert(hi);
                for (auto t : thresholds(spec, f.name))
                    for (auto d : {t - 1, t, t + 1})
                        if (d >= lo && d <= hi) picks.insert(d);
                for (auto v : picks) vals.emplace_back(v);
            }
        } else {
            for (const auto& v : f.categorical().values) vals.emplace_back(v);
        }
        g.cardinality_ = saturating_mul(g.cardinality_, vals.size());
        g.values_.push_back(std::move(vals));
    }
    return g;
}

Instance GroundGrid::at(std::uint64_t index) const {
    Instance inst;
    inst.values.resize(values_.size());
    for (std::size_t k = values_.size(); k-- > 0;) {
        const auto& vals = values_[k];
        const auto& v = vals[index % vals.size()];
        index /= vals.size();
        if (const auto* s = std::get_if<std::string>(&v))
            inst.values[k] = *s;
        else
            inst.values[k] = std::get<std::int64_t>(v);
    }
    return inst;
}

bool satisfies_causal(const ProblemSpec& spec, const Instance& instance) {
    Evaluator ev(spec, instance);
    for (const auto& rule : spec.causal_rules) {
        const auto idx = spec.index_of(rule.guard_feature);
        if (!idx) throw DomainError("unknown feature '" + rule.guard_feature + "'");
        const auto* g = std::get_if<std::string>(&instance.values.at(*idx));
        if (g && *g == rule.guard_value && !ev.all(rule.constraints)) return false;
    }
    return true;
}

bool decision_holds(const ProblemSpec& spec, const Instance& instance) {
    Evaluator ev(spec, instance);
    return std::any_of(spec.decision.clauses.begin(), spec.decision.clauses.end(),
                       [&](const auto& clause) { return ev.all(clause); });
}

Outcome brute_classify(const ProblemSpec& spec, const Instance& instance) {
    check_domain(spec, instance);
    if (!satisfies_causal(spec, instance))
        throw UnrealisticInstance("instance " + instance.str() + " violates the causal rules");
    return decision_holds(spec, instance) ? Outcome::Undesired : Outcome::Desired;
}

std::vector<Instance> realistic_set(const ProblemSpec& spec, const GroundGrid& grid) {
    return select(grid, [&](const Instance& i) { return satisfies_causal(spec, i); }, true);
}

std::vector<Instance> undesired_set(const ProblemSpec& spec, const GroundGrid& grid) {
    return select(
        grid, [&](const Instance& i) { return satisfies_causal(spec, i) && decision_holds(spec, i); }, true);
}

std::vector<Instance> undesired_set_serial(const ProblemSpec& spec, const GroundGrid& grid) {
    return select(
        grid, [&](const Instance& i) { return satisfies_causal(spec, i) && decision_holds(spec, i); }, false);
}

std::vector<Instance> desired_set(const ProblemSpec& spec, const GroundGrid& grid) {
    return select(
        grid, [&](const Instance& i) { return satisfies_causal(spec, i) && !decision_holds(spec, i); }, true);
}

std::vector<CounterfactualPair> brute_pairs(const ProblemSpec& spec, const Instance& original,
                                            const RestrictionVector& restrictions, std::optional<int> cost_bound,
                                            const GroundGrid& grid) {
    return pairs_impl(spec, original, restrictions, cost_bound, grid, true);
}

std::vector<CounterfactualPair> brute_pairs_serial(const ProblemSpec& spec, const Instance& original,
                                                   const RestrictionVector& restrictions,
                                                   std::optional<int> cost_bound, const GroundGrid& grid) {
    return pairs_impl(spec, original, restrictions, cost_bound, grid, false);
}

std::vector<Instance> expand(const Instance& instance, const GroundGrid& grid) {
    const auto& cols = grid.values();
    if (instance.values.size() != cols.size()) throw DomainError("instance does not match the grid");
    std::vector<std::vector<Value>> options(cols.size());
    for (std::size_t k = 0; k < cols.size(); ++k) {
        for (const auto& g : cols[k])
            if (contains(instance.values[k], g)) {
                if (const auto* s = std::get_if<std::string>(&g))
                    options[k].emplace_back(*s);
                else
                    options[k].emplace_back(std::get<std::int64_t>(g));
            }
        if (options[k].empty()) return {};
    }
    std::vector<Instance> out;
    std::vector<std::size_t> pos(cols.size(), 0);
    while (true) {
        Instance inst;
        for (std::size_t k = 0; k < cols.size(); ++k) inst.values.push_back(options[k][pos[k]]);
        out.push_back(std::move(inst));
        std::size_t k = cols.size();
        while (k > 0) {
            --k;
            if (++pos[k] < options[k].size()) break;
            pos[k] = 0;
            if (k == 0) return out;
        }
        if (cols.empty()) return out;
    }
}

}  // namespace cfgs::oracle
