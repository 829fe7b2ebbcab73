#pragma once

#include "cfgs/asp/completion.hpp"
#include "cfgs/compile.hpp"
#include "cfgs/model.hpp"
#include "cfgs/solver/solver.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace cfgs {

struct ExplainOptions {
    std::optional<int> cost_bound;
    bool minimal_only = false;
    std::optional<std::size_t> limit;
};

struct ExplainResult {
    std::vector<CounterfactualPair> pairs;
    // Set when no pair exists, saying whether the restrictions alone rule
    // out every change.
    std::optional<std::string> infeasible;
    bool all_immutable = false;
};

struct EngineOptions {
    // Resolution steps the solver may spend between two answers.
    std::size_t step_budget = 5'000'000;
};

// A compiled spec ready for queries. Immutable after construction and safe
// to share between threads.
class Engine {
public:
    explicit Engine(ProblemSpec spec, EngineOptions options = {});

    const ProblemSpec& spec() const noexcept { return spec_; }
    const CompiledSpec& compiled() const noexcept { return compiled_; }
    const asp::DualProgram& dual() const noexcept { return solver_.program(); }
    const solver::Solver& solver() const noexcept { return solver_; }
    std::string program_text() const;

    // DomainError for missing, mistyped or out-of-domain values.
    void check_domain(const Instance& instance) const;
    bool realistic(const Instance& instance) const;
    // Throws DomainError or UnrealisticInstance.
    Outcome classify(const Instance& instance) const;

    std::vector<Instance> enumerate_undesired(std::optional<std::size_t> limit = std::nullopt) const;
    std::vector<Instance> enumerate_counterfactuals(std::optional<std::size_t> limit = std::nullopt) const;

    // Throws NotUndesired, UnrealisticInstance, DomainError or IllegalCode.
    ExplainResult explain(const Instance& original, const RestrictionVector& restrictions,
                          const ExplainOptions& options = {}) const;

    // Codes a feature may take under a restriction entry.
    std::vector<Code> allowed_codes(std::size_t feature, const std::optional<Code>& entry) const;

private:
    std::vector<Instance> enumerate(const std::string& query, const std::vector<std::string>& vars,
                                    std::optional<std::size_t> limit) const;
    solver::SolveOptions solve_options(std::optional<std::size_t> limit = std::nullopt) const;

    ProblemSpec spec_;
    EngineOptions options_;
    CompiledSpec compiled_;
    solver::Solver solver_;
};

// One-shot conveniences that compile the spec on each call.
Outcome classify(const ProblemSpec& spec, const Instance& instance);
std::vector<Instance> enumerate_undesired(const ProblemSpec& spec, std::optional<std::size_t> limit = std::nullopt);
std::vector<Instance> enumerate_counterfactuals(const ProblemSpec& spec,
                                                std::optional<std::size_t> limit = std::nullopt);
ExplainResult explain(const ProblemSpec& spec, const Instance& original, const RestrictionVector& restrictions,
                      const ExplainOptions& options = {});

// Restriction semantics for one feature: 0 keeps the value, 1 changes it
// (categorical) or increases it (numeric), -1 decreases it.
bool check_restriction(bool numeric, const Scalar& pre, const Scalar& post, Code code);

// Sum of categorical codes plus sum of squared numeric codes. Throws
// UnresolvedCode for Free and IllegalCode for -1 on a categorical feature.
int cost(const std::vector<Code>& codes, const std::vector<bool>& numeric);
int cost(const ProblemSpec& spec, const std::vector<Code>& codes);

// The code that describes how a feature changed between two ground values.
Code observed_code(bool numeric, const Scalar& pre, const Scalar& post);

}  // namespace cfgs
