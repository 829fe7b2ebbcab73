#include "cfgs/asp/completion.hpp"

#include "cfgs/asp/serialize.hpp"
#include "cfgs/errors.hpp"

#include <algorithm>
#include <limits>
#include <optional>
#include <set>

namespace cfgs::asp {

DomainTable domains_from_program(const Program& program) {
    DomainTable table;
    for (const auto& rule : program.rules()) {
        const auto& h = rule.head;
        if (h.pred != "f_domain" || h.args.size() != 2 || !h.args[0].is_sym()) continue;
        auto& dom = table.features[h.args[0].name()];
        if (rule.is_fact() && h.args[1].is_ground()) {
            dom.values.push_back(h.args[1]);
            continue;
        }
        if (!h.args[1].is_var()) continue;
        std::int64_t lo = std::numeric_limits<std::int64_t>::min();
        std::int64_t hi = std::numeric_limits<std::int64_t>::max();
        for (const auto& lit : rule.body) {
            const auto* c = std::get_if<CmpLit>(&lit);
            if (!c || !c->lhs.is_var() || c->lhs.name() != h.args[1].name() || !c->rhs.is_int()) continue;
            const auto v = c->rhs.value();
            switch (c->op) {
            case CmpOp::Ge: lo = std::max(lo, v); break;
            case CmpOp::Gt: lo = std::max(lo, v + 1); break;
            case CmpOp::Le: hi = std::min(hi, v); break;
            case CmpOp::Lt: hi = std::min(hi, v - 1); break;
            default: break;
            }
        }
        if (lo != std::numeric_limits<std::int64_t>::min() && hi != std::numeric_limits<std::int64_t>::max()) {
            dom.is_interval = true;
            dom.lo = lo;
            dom.hi = hi;
        }
    }
    return table;
}

DualProgram::DualProgram(Program original, std::vector<Rule> duals)
    : original_(std::move(original)), duals_(std::move(duals)) {
    for (std::size_t i = 0; i < duals_.size(); ++i) index_[duals_[i].head.key()].push_back(i);
}

const std::vector<std::size_t>& DualProgram::dual_clauses(const PredKey& key) const {
    static const std::vector<std::size_t> none;
    auto it = index_.find(key);
    return it == index_.end() ? none : it->second;
}

namespace {

std::vector<std::string> term_vars(const Term& t) {
    std::vector<std::string> vs;
    t.collect_vars(vs);
    return vs;
}

std::optional<Literal> negated(const Literal& lit) {
    if (const auto* p = std::get_if<PosLit>(&lit)) return NafLit{p->atom};
    if (const auto* n = std::get_if<NafLit>(&lit)) return PosLit{n->atom};
    if (const auto* c = std::get_if<CmpLit>(&lit)) return CmpLit{negate(c->op), c->lhs, c->rhs};
    return std::nullopt;
}

class Completer {
public:
    Completer(const Program& program, const DomainTable& domains) : program_(program), domains_(domains) {}

    std::vector<Rule> run() {
        // Predicates in order of first appearance as a head, then those only
        // referenced from bodies.
        std::vector<PredKey> order;
        std::set<PredKey> seen;
        for (const auto& r : program_.rules())
            if (seen.insert(r.head.key()).second) order.push_back(r.head.key());
        for (const auto& k : program_.predicates())
            if (seen.insert(k).second) order.push_back(k);
        for (const auto& key : order) complete_predicate(key);
        return std::move(out_);
    }

private:
    static std::vector<Term> fresh_args(std::size_t n, const std::string& prefix) {
        std::vector<Term> args;
        for (std::size_t i = 0; i < n; ++i) args.push_back(Term::var(prefix + std::to_string(i + 1)));
        return args;
    }

    void complete_predicate(const PredKey& key) {
        const auto& clauses = program_.clauses(key);
        if (clauses.empty()) {
            out_.push_back(Rule{Atom{key.name, fresh_args(key.arity, "_X"), true}, {}});
            return;
        }
        const auto head_args = fresh_args(key.arity, "_X");
        Rule top{Atom{key.name, head_args, true}, {}};
        for (std::size_t i = 0; i < clauses.size(); ++i)
            top.body.push_back(PosLit{Atom{key.name + "#" + std::to_string(i + 1), head_args, true}});
        out_.push_back(std::move(top));
        for (std::size_t i = 0; i < clauses.size(); ++i)
            complete_clause(program_.rules()[clauses[i]], key.name + "#" + std::to_string(i + 1));
    }

    void complete_clause(const Rule& rule, const std::string& helper) {
        const auto rule_vars = rule_variables(rule);
        auto fresh_name = [&](std::size_t j) {
            std::string base = "_H" + std::to_string(j + 1);
            while (std::find(rule_vars.begin(), rule_vars.end(), base) != rule_vars.end()) base += "_";
            return base;
        };

        // Normalize the head to distinct variables; non-variable or repeated
        // arguments become leading equalities.
        std::vector<Term> head_args;
        std::vector<Literal> lits;
        std::set<std::string> bound;
        for (std::size_t j = 0; j < rule.head.args.size(); ++j) {
            const auto& a = rule.head.args[j];
            if (a.is_var() && !bound.count(a.name())) {
                head_args.push_back(a);
                bound.insert(a.name());
            } else {
                auto h = Term::var(fresh_name(j));
                head_args.push_back(h);
                bound.insert(h.name());
                lits.push_back(CmpLit{CmpOp::Eq, h, a});
            }
        }
        for (const auto& a : rule.head.args)
            for (auto& v : term_vars(a)) bound.insert(v);
        for (const auto& l : rule.body) lits.push_back(l);

        // Body variables first introduced by a positive literal are
        // existential and need a universal check in the dual. Variables
        // fixed by an equation are functionally determined.
        std::vector<std::string> existential;
        std::vector<bool> determining(lits.size(), false);
        std::set<std::string> known = bound;
        for (std::size_t j = 0; j < lits.size(); ++j) {
            const auto& lit = lits[j];
            if (const auto* c = std::get_if<CmpLit>(&lit);
                c && (c->op == CmpOp::Eq || c->op == CmpOp::ArithEq)) {
                auto fresh_single = [&](const Term& side, const Term& other) {
                    if (!side.is_var() || known.count(side.name())) return false;
                    auto ov = term_vars(other);
                    return std::all_of(ov.begin(), ov.end(), [&](const auto& v) { return known.count(v) != 0; });
                };
                if (fresh_single(c->lhs, c->rhs) || fresh_single(c->rhs, c->lhs)) determining[j] = true;
                for (auto& v : term_vars(c->lhs)) known.insert(v);
                for (auto& v : term_vars(c->rhs)) known.insert(v);
                continue;
            }
            std::vector<std::string> vs;
            if (const auto* p = std::get_if<PosLit>(&lit)) {
                for (const auto& a : p->atom.args) a.collect_vars(vs);
                for (auto& v : vs)
                    if (!known.count(v)) {
                        existential.push_back(v);
                        known.insert(v);
                    }
            } else {
                // Range restriction guarantees these are bound already.
                if (const auto* n = std::get_if<NafLit>(&lit))
                    for (const auto& a : n->atom.args) a.collect_vars(vs);
                if (const auto* c = std::get_if<CmpLit>(&lit)) {
                    c->lhs.collect_vars(vs);
                    c->rhs.collect_vars(vs);
                }
                for (auto& v : vs)
                    if (!known.count(v)) throw UnboundedVariableError(
                        "variable " + v + " in '" + to_string(rule) + "' is used before it is bound");
            }
        }

        if (existential.empty()) {
            emit_prefix_duals(helper, head_args, lits, determining);
            return;
        }

        std::vector<VarDomain> ranges;
        for (const auto& v : existential) ranges.push_back(range_of(v, lits, rule));

        // not_p#i(H) :- forall(Y1, p#i#f1(H,Y1)).  ...  innermost calls the
        // prefix dual of the body with every existential treated as bound.
        std::vector<Term> args = head_args;
        std::string current = helper;
        for (std::size_t e = 0; e < existential.size(); ++e) {
            std::vector<Term> inner_args = args;
            inner_args.push_back(Term::var(existential[e]));
            const bool last = e + 1 == existential.size();
            std::string inner = helper + (last ? "#b" : "#f" + std::to_string(e + 1));
            out_.push_back(Rule{Atom{current, args, true},
                                {ForallLit{existential[e], ranges[e], Atom{inner, inner_args, true}}}});
            args = std::move(inner_args);
            current = inner;
        }
        emit_prefix_duals(current, args, lits, determining);
    }

    void emit_prefix_duals(const std::string& name, const std::vector<Term>& head_args,
                           const std::vector<Literal>& lits, const std::vector<bool>& determining) {
        for (std::size_t j = 0; j < lits.size(); ++j) {
            if (determining[j]) continue;  // negation of a defining equation never holds
            auto neg = negated(lits[j]);
            if (!neg) continue;
            Rule r{Atom{name, head_args, true}, {}};
            r.body.assign(lits.begin(), lits.begin() + static_cast<std::ptrdiff_t>(j));
            r.body.push_back(std::move(*neg));
            out_.push_back(std::move(r));
        }
    }

    VarDomain range_of(const std::string& var, const std::vector<Literal>& lits, const Rule& rule) const {
        for (const auto& lit : lits) {
            const auto* p = std::get_if<PosLit>(&lit);
            if (!p || p->atom.pred != "f_domain" || p->atom.args.size() != 2) continue;
            const auto& f = p->atom.args[0];
            const auto& x = p->atom.args[1];
            if (!f.is_sym() || !x.is_var() || x.name() != var) continue;
            auto it = domains_.features.find(f.name());
            if (it != domains_.features.end() && (it->second.is_interval || !it->second.values.empty()))
                return it->second;
        }
        std::optional<std::int64_t> lo, hi;
        for (const auto& lit : lits) {
            const auto* c = std::get_if<CmpLit>(&lit);
            if (!c) continue;
            CmpOp op = c->op;
            const Term* v = &c->lhs;
            const Term* k = &c->rhs;
            if (!(v->is_var() && v->name() == var && k->is_int())) {
                if (c->rhs.is_var() && c->rhs.name() == var && c->lhs.is_int()) {
                    v = &c->rhs;
                    k = &c->lhs;
                    switch (op) {
                    case CmpOp::Ge: op = CmpOp::Le; break;
                    case CmpOp::Le: op = CmpOp::Ge; break;
                    case CmpOp::Gt: op = CmpOp::Lt; break;
                    case CmpOp::Lt: op = CmpOp::Gt; break;
                    default: break;
                    }
                } else {
                    continue;
                }
            }
            const auto b = k->value();
            switch (op) {
            case CmpOp::Ge: lo = std::max(lo.value_or(b), b); break;
            case CmpOp::Gt: lo = std::max(lo.value_or(b + 1), b + 1); break;
            case CmpOp::Le: hi = std::min(hi.value_or(b), b); break;
            case CmpOp::Lt: hi = std::min(hi.value_or(b - 1), b - 1); break;
            default: break;
            }
        }
        if (lo && hi) {
            VarDomain d;
            d.is_interval = true;
            d.lo = *lo;
            d.hi = *hi;
            return d;
        }
        throw UnboundedVariableError("variable " + var + " in '" + to_string(rule) +
                                     "' has no finite range (no f_domain literal or bounds)");
    }

    const Program& program_;
    const DomainTable& domains_;
    std::vector<Rule> out_;
};

}  // namespace

DualProgram complete(const Program& program, const DomainTable& domains) {
    return DualProgram(program, Completer(program, domains).run());
}

DualProgram complete(const Program& program) { return complete(program, domains_from_program(program)); }

std::string serialize_duals(const DualProgram& dual) { return serialize(dual.duals()); }

}  // namespace cfgs::asp
