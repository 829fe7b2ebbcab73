#pragma once

#include "cfgs/asp/ast.hpp"

#include <map>
#include <string>
#include <vector>

namespace cfgs::asp {

// Declared ranges of features, keyed by the first argument of f_domain/2.
struct DomainTable {
    std::map<std::string, VarDomain> features;
};

// Collects f_domain/2 facts (value lists) and f_domain(F,X) :- X #>= lo,
// X #=< hi rules (intervals).
DomainTable domains_from_program(const Program& program);

// A program together with its dual rules. Dual-space predicates are named
// after the predicate they negate: `p` (defining not_p) and `p#i` for the
// negation of clause i.
class DualProgram {
public:
    DualProgram() = default;
    DualProgram(Program original, std::vector<Rule> duals);

    const Program& original() const noexcept { return original_; }
    const std::vector<Rule>& duals() const noexcept { return duals_; }
    const std::vector<std::size_t>& dual_clauses(const PredKey& key) const;
    bool has_dual(const PredKey& key) const { return index_.count(key) != 0; }

    friend bool operator==(const DualProgram& a, const DualProgram& b) {
        return a.original_ == b.original_ && a.duals_ == b.duals_;
    }

private:
    Program original_;
    std::vector<Rule> duals_;
    std::map<PredKey, std::vector<std::size_t>> index_;
};

// Program completion. For p with clauses C1..Ck emits
//   not_p(X) :- not_p_1(X), ..., not_p_k(X).
// and for each clause the disjunction of its negated prefixes. Body-only
// variables become bounded universal checks over their declared domain;
// throws UnboundedVariableError when no finite range can be recovered.
DualProgram complete(const Program& program, const DomainTable& domains);
DualProgram complete(const Program& program);

// Text of the dual rules, one per line.
std::string serialize_duals(const DualProgram& dual);

}  // namespace cfgs::asp
