#pragma once

// Checks that pit the solver against itself or against the oracle over many
// ground atoms. Parallel over atoms with OpenMP; the serial versions are the
// reference and return identical results.

#include "cfgs/asp/ast.hpp"
#include "cfgs/solver/solver.hpp"

#include <string>
#include <vector>

namespace cfgs::oracle {

struct DualViolation {
    asp::Atom atom;
    bool positive = false;  // solver proves the atom
    bool negative = false;  // solver proves its dual
    std::string error;      // set when either query raised
};

// An atom is sound when exactly one of `atom` and `not atom` succeeds.
std::vector<DualViolation> dual_violations(const solver::Solver& solver, const std::vector<asp::Atom>& atoms,
                                           std::size_t step_budget = 10'000);
std::vector<DualViolation> dual_violations_serial(const solver::Solver& solver, const std::vector<asp::Atom>& atoms,
                                                  std::size_t step_budget = 10'000);

}  // namespace cfgs::oracle
