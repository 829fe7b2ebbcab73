#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace cfgs::asp {

// A first-order term. Compound terms carry the wrapper functors of the
// refined rule (original/3, id/3, ...) and arithmetic expressions (+, -, *).
class Term {
public:
    enum class Kind : std::uint8_t { Variable, Symbol, Int, Compound };

    Term() : kind_(Kind::Int) {}

    static Term var(std::string name) { return Term(Kind::Variable, std::move(name), 0, {}); }
    static Term sym(std::string name) { return Term(Kind::Symbol, std::move(name), 0, {}); }
    static Term integer(std::int64_t v) { return Term(Kind::Int, {}, v, {}); }
    static Term compound(std::string functor, std::vector<Term> args) {
        return Term(Kind::Compound, std::move(functor), 0, std::move(args));
    }

    Kind kind() const noexcept { return kind_; }
    bool is_var() const noexcept { return kind_ == Kind::Variable; }
    bool is_sym() const noexcept { return kind_ == Kind::Symbol; }
    bool is_int() const noexcept { return kind_ == Kind::Int; }
    bool is_compound() const noexcept { return kind_ == Kind::Compound; }

    // Variable name, symbol name or compound functor.
    const std::string& name() const noexcept { return name_; }
    std::int64_t value() const noexcept { return value_; }
    const std::vector<Term>& args() const noexcept { return args_; }

    bool is_ground() const;
    bool is_arithmetic() const;
    // Appends variable names in first-occurrence order, without duplicates.
    void collect_vars(std::vector<std::string>& out) const;

    friend bool operator==(const Term&, const Term&) = default;
    friend bool operator<(const Term& a, const Term& b);

private:
    Term(Kind k, std::string n, std::int64_t v, std::vector<Term> a)
        : kind_(k), name_(std::move(n)), value_(v), args_(std::move(a)) {}

    Kind kind_;
    std::string name_;
    std::int64_t value_ = 0;
    std::vector<Term> args_;
};

struct PredKey {
    std::string name;
    std::size_t arity = 0;

    std::string str() const { return name + "/" + std::to_string(arity); }
    friend auto operator<=>(const PredKey&, const PredKey&) = default;
};

// `dual` atoms call into the completed (negated) program instead of the
// user program: `not_p` and its per-clause helpers.
struct Atom {
    std::string pred;
    std::vector<Term> args;
    bool dual = false;

    PredKey key() const { return {pred, args.size()}; }
    friend bool operator==(const Atom&, const Atom&) = default;
};

enum class CmpOp : std::uint8_t { Eq, Neq, Ge, Le, Gt, Lt, ArithEq, ArithNeq };

CmpOp negate(CmpOp op);
const char* spelling(CmpOp op);
bool is_ordered(CmpOp op);

struct PosLit {
    Atom atom;
    friend bool operator==(const PosLit&, const PosLit&) = default;
};

struct NafLit {
    Atom atom;
    friend bool operator==(const NafLit&, const NafLit&) = default;
};

struct CmpLit {
    CmpOp op;
    Term lhs;
    Term rhs;
    friend bool operator==(const CmpLit&, const CmpLit&) = default;
};

// Finite range of a variable quantified by a dual clause: either an explicit
// value list (categorical) or a closed integer interval.
struct VarDomain {
    std::vector<Term> values;
    bool is_interval = false;
    std::int64_t lo = 0;
    std::int64_t hi = -1;
    friend bool operator==(const VarDomain&, const VarDomain&) = default;
};

// Bounded universal check: `goal` must hold for every value of `var` in
// `domain`. Only produced by completion.
struct ForallLit {
    std::string var;
    VarDomain domain;
    Atom goal;
    friend bool operator==(const ForallLit&, const ForallLit&) = default;
};

using Literal = std::variant<PosLit, NafLit, CmpLit, ForallLit>;

struct Rule {
    Atom head;
    std::vector<Literal> body;

    bool is_fact() const noexcept { return body.empty(); }
    friend bool operator==(const Rule&, const Rule&) = default;
};

// Variables of a rule in first-occurrence order (head, then body).
std::vector<std::string> rule_variables(const Rule& rule);

// An immutable, validated logic program. Construction checks range
// restriction and stratification.
class Program {
public:
    Program() = default;
    explicit Program(std::vector<Rule> rules);

    // Skips validation; used for dual programs and by tests that need a
    // deliberately invalid program.
    static Program unchecked(std::vector<Rule> rules);

    const std::vector<Rule>& rules() const noexcept { return rules_; }
    bool empty() const noexcept { return rules_.empty(); }

    // Clause indices of a predicate, in source order.
    const std::vector<std::size_t>& clauses(const PredKey& key) const;
    bool defines(const PredKey& key) const { return index_.count(key) != 0; }
    // True when the predicate is defined or referenced from any body.
    bool knows(const PredKey& key) const;
    // Every predicate defined or referenced, sorted.
    std::vector<PredKey> predicates() const;

    friend bool operator==(const Program& a, const Program& b) { return a.rules_ == b.rules_; }

private:
    void build_index();

    std::vector<Rule> rules_;
    std::map<PredKey, std::vector<std::size_t>> index_;
    std::map<PredKey, bool> referenced_;
};

// Throws RangeRestrictionError for the first offending rule.
void check_range_restriction(const std::vector<Rule>& rules);
// Throws StratificationError naming a cycle through negation.
void check_stratification(const std::vector<Rule>& rules);

}  // namespace cfgs::asp
