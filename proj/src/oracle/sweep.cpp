#include "cfgs/oracle/sweep.hpp"

#include "cfgs/errors.hpp"

#include <optional>

namespace cfgs::oracle {

namespace {

std::optional<DualViolation> check(const solver::Solver& solver, const asp::Atom& atom, std::size_t budget) {
    solver::SolveOptions opts;
    opts.limit = 1;
    opts.step_budget = budget;
    DualViolation v{atom, false, false, {}};
    try {
        v.positive = !solver.solve({asp::PosLit{atom}}, opts).empty();
        v.negative = !solver.solve({asp::NafLit{atom}}, opts).empty();
    } catch (const Error& e) {
        v.error = e.what();
        return v;
    }
    if (v.positive != v.negative) return std::nullopt;
    return v;
}

std::vector<DualViolation> run(const solver::Solver& solver, const std::vector<asp::Atom>& atoms, std::size_t budget,
                               bool parallel) {
    const auto n = static_cast<std::int64_t>(atoms.size());
    std::vector<std::optional<DualViolation>> found(atoms.size());
    if (parallel) {
#ifdef CFGS_HAVE_OPENMP
#pragma omp parallel for schedule(dynamic, 16)
#endif
        for (std::int64_t i = 0; i < n; ++i) found[i] = check(solver, atoms[i], budget);
    } else {
        for (std::int64_t i = 0; i < n; ++i) found[i] = check(solver, atoms[i], budget);
    }
    std::vector<DualViolation> out;
    for (auto& f : found)
        if (f) out.push_back(std::move(*f));
    return out;
}

}  // namespace

std::vector<DualViolation> dual_violations(const solver::Solver& solver, const std::vector<asp::Atom>& atoms,
                                           std::size_t step_budget) {
    return run(solver, atoms, step_budget, true);
}

std::vector<DualViolation> dual_violations_serial(const solver::Solver& solver, const std::vector<asp::Atom>& atoms,
                                                  std::size_t step_budget) {
    return run(solver, atoms, step_budget, false);
}

}  // namespace cfgs::oracle
