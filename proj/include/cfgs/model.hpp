#pragma once

#include "cfgs/solver/domain.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace cfgs {

enum class Mutability : std::uint8_t { Free, Immutable, IncreaseOnly, DecreaseOnly };

struct Categorical {
    std::vector<std::string> values;
    friend bool operator==(const Categorical&, const Categorical&) = default;
};

struct Numeric {
    std::int64_t lo = 0;
    std::int64_t hi = 0;
    friend bool operator==(const Numeric&, const Numeric&) = default;
};

struct FeatureSpec {
    std::string name;
    std::variant<Categorical, Numeric> kind;
    Mutability mutability = Mutability::Free;

    bool numeric() const noexcept { return std::holds_alternative<Numeric>(kind); }
    const Categorical& categorical() const { return std::get<Categorical>(kind); }
    const Numeric& range() const { return std::get<Numeric>(kind); }
    friend bool operator==(const FeatureSpec&, const FeatureSpec&) = default;
};

enum class Op : std::uint8_t { Eq, Neq, Le, Ge, Lt, Gt };

const char* spelling(Op op);  // "=", "!=", "<=", ...

using Scalar = std::variant<std::string, std::int64_t>;

std::string to_string(const Scalar& v);

// One test inside a decision clause or causal rule. Either `feature op value`
// or a reference to an auxiliary predicate, possibly negated (`not ab1`).
struct Condition {
    std::string subject;
    Op op = Op::Eq;
    Scalar value;
    bool auxiliary = false;
    bool negated = false;

    static Condition compare(std::string feature, Op op, Scalar value) {
        return Condition{std::move(feature), op, std::move(value), false, false};
    }
    static Condition aux(std::string pred, bool negated) { return Condition{std::move(pred), Op::Eq, {}, true, negated}; }

    std::string str() const;
    friend bool operator==(const Condition&, const Condition&) = default;
};

// guard_feature = guard_value implies every constraint.
struct CausalRule {
    std::string guard_feature;
    std::string guard_value;
    std::vector<Condition> constraints;
    friend bool operator==(const CausalRule&, const CausalRule&) = default;
};

struct AuxPredicate {
    std::string name;
    std::vector<std::vector<Condition>> clauses;
    friend bool operator==(const AuxPredicate&, const AuxPredicate&) = default;
};

// The undesired outcome holds iff some clause has all its conditions true.
struct DecisionModel {
    std::string target;
    std::vector<std::vector<Condition>> clauses;
    std::vector<AuxPredicate> auxiliary;
    friend bool operator==(const DecisionModel&, const DecisionModel&) = default;
};

struct Metadata {
    std::string dataset;
    std::string undesired_label;
    std::string variant;
    std::string description;
    friend bool operator==(const Metadata&, const Metadata&) = default;
};

struct ProblemSpec {
    Metadata metadata;
    std::vector<FeatureSpec> features;
    std::vector<CausalRule> causal_rules;
    DecisionModel decision;

    std::optional<std::size_t> index_of(const std::string& feature) const;
    const FeatureSpec& feature(const std::string& name) const;  // throws SpecValidationError
    // Checks every cross-reference and domain; throws SpecValidationError
    // naming the offending field.
    void validate() const;

    friend bool operator==(const ProblemSpec&, const ProblemSpec&) = default;
};

// A feature value: ground (symbol or integer) or, in symbolic answers, a set.
using Value = std::variant<std::string, std::int64_t, solver::SymbolSet, solver::NumericSet>;

bool is_ground(const Value& v);
bool contains(const Value& set, const Scalar& v);
std::string to_string(const Value& v);

// Values in the spec's feature order.
struct Instance {
    std::vector<Value> values;

    bool ground() const;
    std::string str() const;  // "(husband, male, 40)"
    friend bool operator==(const Instance&, const Instance&) = default;
};

// Builds an instance from name=value pairs, parsing integers for numeric
// features. Throws DomainError for unknown or missing features.
Instance make_instance(const ProblemSpec& spec, const std::vector<std::pair<std::string, std::string>>& values);

enum class Outcome : std::uint8_t { Undesired, Desired };

enum class Code : std::int8_t { MinusOne = -1, Zero = 0, One = 1, Free = 2 };

std::string to_string(Code c);  // "-1", "0", "1", "free"
Code parse_code(const std::string& s);  // throws IllegalCode

// Per-feature restriction. An absent entry falls back to the feature's
// default mutability.
struct RestrictionVector {
    std::vector<std::optional<Code>> codes;

    static RestrictionVector defaults(const ProblemSpec& spec) { return {std::vector<std::optional<Code>>(spec.features.size())}; }
    friend bool operator==(const RestrictionVector&, const RestrictionVector&) = default;
};

RestrictionVector make_restrictions(const ProblemSpec& spec,
                                    const std::vector<std::pair<std::string, std::string>>& codes);

struct CounterfactualPair {
    Instance original;
    std::vector<Code> codes;
    Instance counterfactual;
    int cost = 0;
    friend bool operator==(const CounterfactualPair&, const CounterfactualPair&) = default;
};

}  // namespace cfgs
