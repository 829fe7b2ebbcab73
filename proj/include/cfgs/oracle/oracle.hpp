#pragma once

// Brute-force reference implementation. Nothing here calls the solver or the
// spec compiler: classification, realism and pair enumeration are evaluated
// directly from the spec, and ground_truth interprets a program naively.

#include "cfgs/asp/ast.hpp"
#include "cfgs/compile.hpp"
#include "cfgs/model.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

namespace cfgs::oracle {

// Every ground value of every feature. Exact grids enumerate numeric ranges
// integer by integer; sampled grids thin ranges wider than `max_numeric`
// values to a stride, keeping both ends and every decision threshold.
class GroundGrid {
public:
    static constexpr std::uint64_t kExactCap = 10'000;

    static GroundGrid exact(const ProblemSpec& spec, std::uint64_t cap = kExactCap);
    static GroundGrid sampled(const ProblemSpec& spec, std::size_t max_numeric = 1000);

    const std::vector<std::vector<Scalar>>& values() const noexcept { return values_; }
    std::uint64_t cardinality() const noexcept { return cardinality_; }
    bool is_sampled() const noexcept { return sampled_; }
    // Mixed-radix decoding, last feature fastest.
    Instance at(std::uint64_t index) const;

private:
    std::vector<std::vector<Scalar>> values_;
    std::uint64_t cardinality_ = 1;
    bool sampled_ = false;
};

// Direct evaluation, no validation.
bool satisfies_causal(const ProblemSpec& spec, const Instance& instance);
bool decision_holds(const ProblemSpec& spec, const Instance& instance);

// Throws DomainError for out-of-domain values and UnrealisticInstance when a
// causal rule is violated.
Outcome brute_classify(const ProblemSpec& spec, const Instance& instance);

// Ground instance sets over a grid, in grid order. The parallel versions
// produce identical output.
std::vector<Instance> realistic_set(const ProblemSpec& spec, const GroundGrid& grid);
std::vector<Instance> undesired_set(const ProblemSpec& spec, const GroundGrid& grid);
std::vector<Instance> desired_set(const ProblemSpec& spec, const GroundGrid& grid);
std::vector<Instance> undesired_set_serial(const ProblemSpec& spec, const GroundGrid& grid);

// All ground counterfactual pairs for `original`, costs counted as changed
// features. Throws GridTooLarge for a sampled grid and NotUndesired when the
// original is already desired.
std::vector<CounterfactualPair> brute_pairs(const ProblemSpec& spec, const Instance& original,
                                            const RestrictionVector& restrictions, std::optional<int> cost_bound,
                                            const GroundGrid& grid);
std::vector<CounterfactualPair> brute_pairs_serial(const ProblemSpec& spec, const Instance& original,
                                                   const RestrictionVector& restrictions,
                                                   std::optional<int> cost_bound, const GroundGrid& grid);

// Ground members of a possibly set-valued instance, restricted to the grid.
std::vector<Instance> expand(const Instance& instance, const GroundGrid& grid);

// Truth of a ground atom under the stratified semantics, by memoized naive
// top-down evaluation. Variables that occur only in a rule body range over
// `universe`. Positive cycles are resolved by iterating to a fixpoint.
class GroundEvaluator {
public:
    GroundEvaluator(const asp::Program& program, std::vector<asp::Term> universe);
    ~GroundEvaluator();
    GroundEvaluator(GroundEvaluator&&) noexcept;

    bool holds(const asp::Atom& ground_atom);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

bool ground_truth(const asp::Program& program, const asp::Atom& ground_atom, std::vector<asp::Term> universe = {});

// Ground atoms for every predicate of a compiled spec: in-domain values,
// out-of-domain probes and values next to every threshold. At most `cap`
// atoms overall, chosen deterministically from `seed`.
std::vector<asp::Atom> ground_atoms(const ProblemSpec& spec, const CompiledSpec& compiled, std::size_t cap = 10'000,
                                    std::uint64_t seed = 1);

}  // namespace cfgs::oracle
