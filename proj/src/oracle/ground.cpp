#include "cfgs/asp/serialize.hpp"
#include "cfgs/errors.hpp"
#include "cfgs/oracle/oracle.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <unordered_map>
#include <unordered_set>

namespace cfgs::oracle {

using asp::Atom;
using asp::CmpLit;
using asp::CmpOp;
using asp::Term;

namespace {

using Env = std::map<std::string, Term>;

Term substitute(const Term& t, const Env& env) {
    if (t.is_var()) {
        auto it = env.find(t.name());
        return it == env.end() ? t : it->second;
    }
    if (!t.is_compound()) return t;
    std::vector<Term> args;
    for (const auto& a : t.args()) args.push_back(substitute(a, env));
    return Term::compound(t.name(), std::move(args));
}

// Matches a rule term against a ground term, extending env.
bool match(const Term& pattern, const Term& ground, Env& env) {
    switch (pattern.kind()) {
    case Term::Kind::Variable: {
        auto [it, fresh] = env.emplace(pattern.name(), ground);
        return fresh || it->second == ground;
    }
    case Term::Kind::Compound:
        if (pattern.is_arithmetic()) throw InstantiationError("arithmetic in a rule head");
        if (!ground.is_compound() || ground.name() != pattern.name() || ground.args().size() != pattern.args().size())
            return false;
        for (std::size_t i = 0; i < pattern.args().size(); ++i)
            if (!match(pattern.args()[i], ground.args()[i], env)) return false;
        return true;
    default: return pattern == ground;
    }
}

std::optional<std::int64_t> eval(const Term& t) {
    if (t.is_int()) return t.value();
    if (!t.is_arithmetic()) return std::nullopt;
    auto a = eval(t.args()[0]);
    auto b = eval(t.args()[1]);
    if (!a || !b) return std::nullopt;
    if (t.name() == "+") return *a + *b;
    if (t.name() == "-") return *a - *b;
    return *a * *b;
}

// Value of a ground term as a comparable object: arithmetic is evaluated.
Term normal(const Term& t) {
    if (t.is_arithmetic()) {
        auto v = eval(t);
        if (!v) throw TypeMismatch("arithmetic on a non-integer: " + asp::to_string(t));
        return Term::integer(*v);
    }
    return t;
}

}  // namespace

struct GroundEvaluator::Impl {
    enum class State : std::uint8_t { Busy, False, True };

    asp::Program program;
    std::vector<Term> universe;
    std::unordered_map<std::string, State> memo;
    std::unordered_set<std::string> proven;  // survives fixpoint rounds
    bool cut = false;

    bool prove(const Atom& atom) {
        const auto key = asp::to_string(atom);
        if (proven.count(key)) return true;
        if (auto it = memo.find(key); it != memo.end()) {
            if (it->second == State::Busy) {
                cut = true;
                return false;
            }
            return it->second == State::True;
        }
        memo[key] = State::Busy;
        bool result = false;
        if (program.defines(atom.key())) {
            for (auto idx : program.clauses(atom.key())) {
                const auto& rule = program.rules()[idx];
                Env env;
                bool ok = true;
                for (std::size_t i = 0; i < atom.args.size() && ok; ++i) ok = match(rule.head.args[i], atom.args[i], env);
                if (!ok) continue;
                std::vector<bool> done(rule.body.size(), false);
                if (body(rule.body, done, env)) {
                    result = true;
                    break;
                }
            }
        }
        memo[key] = result ? State::True : State::False;
        if (result) proven.insert(key);
        return result;
    }

    // Tri-state readiness of a comparison: nullopt when it still has unbound
    // variables it cannot bind itself.
    std::optional<bool> compare(const CmpLit& c, Env& env, std::optional<std::string>& bind_var, Term& bind_value) {
        const Term l = substitute(c.lhs, env), r = substitute(c.rhs, env);
        const bool lg = l.is_ground(), rg = r.is_ground();
        if (c.op == CmpOp::Eq || c.op == CmpOp::ArithEq) {
            if (lg && rg) {
                if (c.op == CmpOp::Eq) return l == r;
                return normal(l) == normal(r);
            }
            if (l.is_var() && rg) {
                bind_var = l.name();
                bind_value = c.op == CmpOp::ArithEq ? normal(r) : r;
                return true;
            }
            if (r.is_var() && lg) {
                bind_var = r.name();
                bind_value = c.op == CmpOp::ArithEq ? normal(l) : l;
                return true;
            }
            return std::nullopt;
        }
        if (!lg || !rg) return std::nullopt;
        if (c.op == CmpOp::Neq) return !(l == r);
        const Term a = normal(l), b = normal(r);
        if (c.op == CmpOp::ArithNeq) return !(a == b);
        if (!a.is_int() || !b.is_int())
            throw TypeMismatch("ordered comparison on " + asp::to_string(a) + " and " + asp::to_string(b));
        switch (c.op) {
        case CmpOp::Ge: return a.value() >= b.value();
        case CmpOp::Le: return a.value() <= b.value();
        case CmpOp::Gt: return a.value() > b.value();
        case CmpOp::Lt: return a.value() < b.value();
        default: return false;
        }
    }

    bool ground_atom(const Atom& a, const Env& env, Atom& out) {
        out.pred = a.pred;
        out.dual = false;
        out.args.clear();
        for (const auto& t : a.args) {
            out.args.push_back(substitute(t, env));
            if (!out.args.back().is_ground()) return false;
        }
        return true;
    }

    // Evaluates the remaining literals, picking any that is ready. When none
    // is, the first unbound variable of a positive literal is enumerated.
    bool body(const std::vector<asp::Literal>& lits, std::vector<bool>& done, Env& env) {
        std::optional<std::size_t> pending_pos;
        for (std::size_t i = 0; i < lits.size(); ++i) {
            if (done[i]) continue;
            const auto& lit = lits[i];
            if (const auto* p = std::get_if<asp::PosLit>(&lit)) {
                Atom g;
                if (!ground_atom(p->atom, env, g)) {
                    if (!pending_pos) pending_pos = i;
                    continue;
                }
                if (!prove(g)) return false;
                done[i] = true;
                bool r = body(lits, done, env);
                done[i] = false;
                return r;
            }
            if (const auto* n = std::get_if<asp::NafLit>(&lit)) {
                Atom g;
                if (!ground_atom(n->atom, env, g)) continue;
                if (prove(g)) return false;
                done[i] = true;
                bool r = body(lits, done, env);
                done[i] = false;
                return r;
            }
            if (const auto* c = std::get_if<CmpLit>(&lit)) {
                std::optional<std::string> var;
                Term value;
                auto r = compare(*c, env, var, value);
                if (!r) continue;
                if (!*r) return false;
                done[i] = true;
                if (var) env[*var] = value;
                bool ok = body(lits, done, env);
                if (var) env.erase(*var);
                done[i] = false;
                return ok;
            }
            throw Error("bounded universal literal in a user program");
        }
        if (std::all_of(done.begin(), done.end(), [](bool b) { return b; })) return true;
        if (!pending_pos) {
            // Only comparisons and negations with unbound variables remain.
            for (std::size_t i = 0; i < lits.size(); ++i)
                if (!done[i]) throw InstantiationError("literal " + asp::to_string(lits[i]) + " is never bound");
        }
        const auto& atom = std::get<asp::PosLit>(lits[*pending_pos]).atom;
        std::vector<std::string> vars;
        for (const auto& t : atom.args) substitute(t, env).collect_vars(vars);
        const auto var = vars.front();
        for (const auto& v : universe) {
            env[var] = v;
            if (body(lits, done, env)) {
                env.erase(var);
                return true;
            }
        }
        env.erase(var);
        return false;
    }

    bool holds(const Atom& atom) {
        for (;;) {
            memo.clear();
            cut = false;
            const auto before = proven.size();
            const bool r = prove(atom);
            if (!cut || proven.size() == before) return r;
        }
    }
};

GroundEvaluator::GroundEvaluator(const asp::Program& program, std::vector<Term> universe)
    : impl_(std::make_unique<Impl>()) {
    impl_->program = program;
    if (universe.empty()) {
        std::set<Term> seen;
        std::function<void(const Term&)> add = [&](const Term& t) {
            if (t.is_sym() || t.is_int()) seen.insert(t);
            if (t.is_compound())
                for (const auto& a : t.args()) add(a);
        };
        for (const auto& r : program.rules()) {
            for (const auto& a : r.head.args) add(a);
            for (const auto& l : r.body) {
                if (const auto* p = std::get_if<asp::PosLit>(&l))
                    for (const auto& a : p->atom.args) add(a);
                if (const auto* n = std::get_if<asp::NafLit>(&l))
                    for (const auto& a : n->atom.args) add(a);
                if (const auto* c = std::get_if<CmpLit>(&l)) {
                    add(c->lhs);
                    add(c->rhs);
                }
            }
        }
        universe.assign(seen.begin(), seen.end());
    }
    impl_->universe = std::move(universe);
}

GroundEvaluator::~GroundEvaluator() = default;
GroundEvaluator::GroundEvaluator(GroundEvaluator&&) noexcept = default;

bool GroundEvaluator::holds(const Atom& ground_atom) {
    for (const auto& a : ground_atom.args)
        if (!a.is_ground()) throw InstantiationError("atom " + asp::to_string(ground_atom) + " is not ground");
    return impl_->holds(ground_atom);
}

bool ground_truth(const asp::Program& program, const Atom& ground_atom, std::vector<Term> universe) {
    return GroundEvaluator(program, std::move(universe)).holds(ground_atom);
}

namespace {

const std::string kProbe = "zz_unknown";

struct Probes {
    std::vector<std::vector<Term>> feature;
    std::vector<Term> names, values, categorical, numeric;
};

Probes probes(const ProblemSpec& spec) {
    Probes p;
    std::set<Term> values, categorical, numeric;
    for (const auto& f : spec.features) {
        std::vector<Term> vals;
        if (f.numeric()) {
            const auto lo = f.range().lo, hi = f.range().hi;
            std::set<std::int64_t> picks{lo - 1, lo, lo + 1, lo + (hi - lo) / 2, hi - 1, hi, hi + 1};
            auto scan = [&](const std::vector<Condition>& conds) {
                for (const auto& c : conds)
                    if (!c.auxiliary && c.subject == f.name)
                        if (const auto* t = std::get_if<std::int64_t>(&c.value)) picks.insert({*t - 1, *t, *t + 1});
            };
            for (const auto& clause : spec.decision.clauses) scan(clause);
            for (const auto& aux : spec.decision.auxiliary)
                for (const auto& clause : aux.clauses) scan(clause);
            for (const auto& rule : spec.causal_rules) scan(rule.constraints);
            for (auto v : picks) vals.push_back(Term::integer(v));
            numeric.insert(vals.begin(), vals.end());
        } else {
            for (const auto& v : f.categorical().values) vals.push_back(Term::sym(v));
            vals.push_back(Term::sym(kProbe));
            categorical.insert(vals.begin(), vals.end());
        }
        values.insert(vals.begin(), vals.end());
        p.feature.push_back(std::move(vals));
        p.names.push_back(Term::sym(f.name));
    }
    for (const char* n : {"restrict_C", "restrict_N"}) p.names.push_back(Term::sym(n));
    p.names.push_back(Term::sym(kProbe));
    for (int c = -1; c <= 2; ++c) values.insert(Term::integer(c));
    // compare_C/compare_N exist even when no feature of that kind does.
    if (categorical.empty()) categorical.insert(Term::sym(kProbe));
    if (numeric.empty())
        for (int c = -1; c <= 1; ++c) numeric.insert(Term::integer(c));
    p.values.assign(values.begin(), values.end());
    p.categorical.assign(categorical.begin(), categorical.end());
    p.numeric.assign(numeric.begin(), numeric.end());
    return p;
}

void leaves(const ArgSort& s, const Probes& p, std::size_t nfeatures, std::vector<const std::vector<Term>*>& out,
            std::vector<std::vector<Term>>& owned) {
    using K = ArgSort::Kind;
    switch (s.kind) {
    case K::Feature: out.push_back(&p.feature.at(s.feature)); return;
    case K::FeatureName: out.push_back(&p.names); return;
    case K::DomainValue: out.push_back(&p.values); return;
    case K::AnyCategorical: out.push_back(&p.categorical); return;
    case K::AnyNumeric: out.push_back(&p.numeric); return;
    case K::Wrapped:
        for (const auto& item : s.items) leaves(item, p, nfeatures, out, owned);
        return;
    default: break;
    }
    std::vector<Term> codes;
    if (s.kind == K::CategoricalCode)
        for (int c : {-1, 0, 1, 2}) codes.push_back(Term::integer(c));
    else if (s.kind == K::NumericCode)
        for (int c : {-2, -1, 0, 1, 2}) codes.push_back(Term::integer(c));
    else
        for (int c = -1; c <= static_cast<int>(nfeatures) + 1; ++c) codes.push_back(Term::integer(c));
    owned.push_back(std::move(codes));
    out.push_back(nullptr);  // resolved against `owned` by the caller
}

Term build(const ArgSort& s, const std::vector<Term>& picks, std::size_t& pos) {
    if (s.kind != ArgSort::Kind::Wrapped) return picks[pos++];
    std::vector<Term> args;
    for (const auto& item : s.items) args.push_back(build(item, picks, pos));
    return Term::compound(s.functor, std::move(args));
}

}  // namespace

std::vector<Atom> ground_atoms(const ProblemSpec& spec, const CompiledSpec& compiled, std::size_t cap,
                               std::uint64_t seed) {
    const auto p = probes(spec);
    struct Plan {
        const Signature* sig;
        std::vector<std::vector<Term>> lists;
        long double size;
    };
    std::vector<Plan> plans;
    std::vector<std::pair<const Signature*, std::vector<std::vector<Term>>>> typed;
    for (const auto& sig : compiled.signatures) {
        Plan plan{&sig, {}, 1.0L};
        // f_domain/2 is typed by its first argument: each name is paired
        // with its own values, never with another feature's.
        if (sig.args.size() == 2 && sig.args[0].kind == ArgSort::Kind::FeatureName &&
            sig.args[1].kind == ArgSort::Kind::DomainValue) {
            typed.emplace_back(&sig, std::vector<std::vector<Term>>{});
            auto& rows = typed.back().second;
            for (std::size_t i = 0; i < spec.features.size(); ++i)
                for (const auto& v : p.feature[i]) rows.push_back({p.names[i], v});
            for (int c = -1; c <= 2; ++c) rows.push_back({Term::sym("restrict_C"), Term::integer(c)});
            for (int c = -2; c <= 2; ++c) rows.push_back({Term::sym("restrict_N"), Term::integer(c)});
            for (const auto& v : p.values) rows.push_back({Term::sym(kProbe), v});
            continue;
        }
        std::vector<const std::vector<Term>*> refs;
        std::vector<std::vector<Term>> owned;
        for (const auto& a : sig.args) leaves(a, p, spec.features.size(), refs, owned);
        std::size_t o = 0;
        for (const auto* r : refs) plan.lists.push_back(r ? *r : owned[o++]);
        for (const auto& l : plan.lists) plan.size *= static_cast<long double>(l.size());
        plans.push_back(std::move(plan));
    }
    // Small predicates first so that leftover budget flows to larger ones.
    std::stable_sort(plans.begin(), plans.end(), [](const Plan& a, const Plan& b) { return a.size < b.size; });

    std::mt19937_64 rng(seed);
    std::vector<Atom> out;
    std::size_t remaining = cap;
    for (const auto& [sig, rows] : typed)
        for (const auto& row : rows)
            if (remaining > 0) {
                out.push_back(Atom{sig->key.name, row, false});
                --remaining;
            }
    for (std::size_t k = 0; k < plans.size(); ++k) {
        const auto& plan = plans[k];
        const std::size_t share = remaining / (plans.size() - k);
        std::vector<std::vector<Term>> rows;
        if (plan.size == 0) continue;
        if (plan.size <= static_cast<long double>(share)) {
            std::vector<std::size_t> pos(plan.lists.size(), 0);
            for (bool more = true; more;) {
                std::vector<Term> row;
                for (std::size_t i = 0; i < pos.size(); ++i) row.push_back(plan.lists[i][pos[i]]);
                rows.push_back(std::move(row));
                more = false;
                for (std::size_t i = pos.size(); i-- > 0;) {
                    if (++pos[i] < plan.lists[i].size()) {
                        more = true;
                        break;
                    }
                    pos[i] = 0;
                }
            }
        } else {
            std::set<std::vector<Term>> seen;
            for (std::size_t tries = 0; seen.size() < share && tries < share * 8; ++tries) {
                std::vector<Term> row;
                for (const auto& l : plan.lists) row.push_back(l[rng() % l.size()]);
                if (seen.insert(row).second) rows.push_back(std::move(row));
            }
        }
        for (const auto& row : rows) {
            Atom a{plan.sig->key.name, {}, false};
            std::size_t pos = 0;
            for (const auto& s : plan.sig->args) a.args.push_back(build(s, row, pos));
            out.push_back(std::move(a));
        }
        remaining -= std::min(remaining, rows.size());
    }
    return out;
}

}  // namespace cfgs::oracle
