#pragma once

#include "cfgs/asp/ast.hpp"
#include "cfgs/asp/completion.hpp"
#include "cfgs/solver/domain.hpp"

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace cfgs::solver {

// A variable that is still free apart from values it must not take.
struct Open {
    std::vector<asp::Term> excluded;
    friend bool operator==(const Open&, const Open&) = default;
};

// A ground term (possibly containing variables named _G<n>, which then have
// their own entries), an integer set or a symbol set.
using Binding = std::variant<asp::Term, NumericSet, SymbolSet, Open>;

struct Substitution {
    std::map<std::string, Binding> bindings;

    const Binding* find(const std::string& var) const;
    // Replaces variables bound to terms; set-valued and open variables are
    // left in place. Idempotent.
    asp::Term apply(const asp::Term& t) const;
    // "X=husband, Y∈[26,90]" with variables in name order.
    std::string str() const;

    friend bool operator==(const Substitution&, const Substitution&) = default;
};

std::optional<Substitution> unify(const asp::Term& a, const asp::Term& b, const Substitution& s = {});
// Narrows `s` by a comparison. Ordered comparisons need integer operands;
// returns nullopt when the constraint is unsatisfiable under `s`.
std::optional<Substitution> assert_constraint(const asp::CmpLit& c, const Substitution& s = {});

struct DerivationNode {
    enum class Via : std::uint8_t { Fact, Rule, Constraint, Dual, Forall };

    asp::Literal goal;
    Via via = Via::Rule;
    std::string rule;  // clause that justified the goal, empty for constraints
    std::vector<DerivationNode> children;
};

struct Answer {
    Substitution substitution;
    std::shared_ptr<const DerivationNode> derivation;
};

// Throws TraceUnavailable when the answer was produced without tracing.
const DerivationNode& trace(const Answer& answer);
// Indented one-goal-per-line rendering.
std::string render(const DerivationNode& node);

struct SolveOptions {
    std::optional<std::size_t> limit;
    bool trace = false;
    // Resolution steps allowed between two answers.
    std::size_t step_budget = 10000;
};

class Solver {
public:
    explicit Solver(asp::DualProgram program);
    ~Solver();
    Solver(Solver&&) noexcept;
    Solver& operator=(Solver&&) noexcept;

    const asp::DualProgram& program() const noexcept;

    // Streams answers in derivation order; stop early by returning false.
    void solve(const std::vector<asp::Literal>& query, const SolveOptions& options,
               const std::function<bool(const Answer&)>& on_answer) const;
    std::vector<Answer> solve(const std::vector<asp::Literal>& query, const SolveOptions& options = {}) const;
    std::vector<Answer> solve(const std::string& query, const SolveOptions& options = {}) const;
    bool holds(const std::vector<asp::Literal>& query) const;

    // Runs a query after pre-constraining its variables with `given`.
    void solve_with(const std::vector<asp::Literal>& query, const Substitution& given, const SolveOptions& options,
                    const std::function<bool(const Answer&)>& on_answer) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace cfgs::solver
