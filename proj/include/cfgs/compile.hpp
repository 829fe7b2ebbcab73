#pragma once

#include "cfgs/asp/ast.hpp"
#include "cfgs/model.hpp"

#include <string>
#include <vector>

namespace cfgs {

// What a predicate argument ranges over, for generating ground atoms.
struct ArgSort {
    enum class Kind : std::uint8_t {
        Feature,         // value of features[feature]
        FeatureName,     // first argument of f_domain/2
        DomainValue,     // second argument of f_domain/2
        CategoricalCode, // restriction code {0,1}
        NumericCode,     // restriction code {0,1,-1}
        Cost,            // 0..feature count
        AnyCategorical,  // any categorical value of any feature
        AnyNumeric,      // any numeric value of any feature
        Wrapped,         // functor(items...)
    };
    Kind kind = Kind::Feature;
    std::size_t feature = 0;
    std::string functor;
    std::vector<ArgSort> items;
};

struct Signature {
    asp::PredKey key;
    std::vector<ArgSort> args;
};

struct CompiledSpec {
    asp::Program program;
    std::string target;                       // wrapper predicate (undesired outcome)
    std::vector<std::string> pre_vars;        // per feature: A, B, C, ...
    std::vector<std::string> post_vars;       // A1, B1, C1, ...
    std::vector<std::string> code_vars;       // Z1, Z2, ...
    std::vector<std::size_t> decision_features;  // features the decision model reads
    std::vector<Signature> signatures;        // every predicate the program defines
};

// Emits the complete program: domains, world properties, causal rules,
// realistic-instance rules, decision rules and the counterfactual,
// restriction, cost and refined rules. Validates the spec first.
// Throws SpecValidationError or StratificationError.
CompiledSpec compile_spec(const ProblemSpec& spec);
asp::Program compile(const ProblemSpec& spec);

// cf_<target>(post vars) :- domains, post-world properties, not lite_<target>(..).
asp::Rule build_counterfactual_rule(const ProblemSpec& spec);

// Variable naming used in compiled rules.
std::string pre_var(std::size_t feature);
std::string post_var(std::size_t feature);

}  // namespace cfgs
