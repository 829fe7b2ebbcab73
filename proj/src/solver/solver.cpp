#include "cfgs/solver/solver.hpp"

#include "cfgs/asp/parser.hpp"
#include "cfgs/asp/serialize.hpp"
#include "cfgs/errors.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <unordered_map>

namespace cfgs::solver {

using asp::CmpOp;
using asp::Term;

namespace {

// Labeling a numeric variable beyond this many values is treated as an
// instantiation error rather than attempted.
constexpr std::uint64_t kLabelCap = 1'000'000;

// ---------------------------------------------------------------------------
// Compiled program

struct CTerm {
    enum class K : std::uint8_t { Var, Sym, Int, Fn };
    K k = K::Int;
    std::int64_t v = 0;  // local variable index, symbol id, integer or functor id
    std::vector<CTerm> args;
};

struct CLit {
    enum class K : std::uint8_t { Call, Cmp, Forall };
    K k = K::Call;
    bool naf = false;  // rendered as `not p(..)`; calls the dual of p
    int pred = -1;
    std::vector<CTerm> args;
    CmpOp op = CmpOp::Eq;
    CTerm lhs, rhs;
    // Forall: variable, domain and the instantiated goal.
    int fvar = -1;
    int frame = 0;
    std::vector<CTerm> fvalues;
    bool finterval = false;
    std::int64_t flo = 0, fhi = -1;
    std::vector<CLit> inner;
};

struct CClause {
    std::vector<CTerm> head;
    std::vector<CLit> body;
    int nvars = 0;
    std::string text;
};

struct CPred {
    asp::PredKey key;
    bool dual = false;
    bool helper = false;  // per-clause dual helper, spliced out of traces
    std::vector<int> clauses;
    // First-argument index: constant key -> matching clauses in order.
    std::map<std::pair<int, std::int64_t>, std::vector<int>> by_first;
    std::vector<int> var_first;
};

class Symbols {
public:
    std::int64_t intern(const std::string& s) {
        auto it = ids_.find(s);
        if (it != ids_.end()) return it->second;
        const auto id = static_cast<std::int64_t>(names_.size());
        names_.push_back(s);
        ids_.emplace(s, id);
        return id;
    }
    std::optional<std::int64_t> find(const std::string& s) const {
        auto it = ids_.find(s);
        if (it == ids_.end()) return std::nullopt;
        return it->second;
    }
    const std::string& name(std::int64_t id) const { return names_[static_cast<std::size_t>(id)]; }
    std::size_t size() const { return names_.size(); }

private:
    std::vector<std::string> names_;
    std::unordered_map<std::string, std::int64_t> ids_;
};

// Symbol lookup layered over the program's table so that a query can add
// symbols without touching shared state.
class LocalSymbols {
public:
    explicit LocalSymbols(const Symbols* base) : base_(base) {}
    std::int64_t intern(const std::string& s) {
        if (base_)
            if (auto id = base_->find(s)) return *id;
        const auto offset = static_cast<std::int64_t>(base_ ? base_->size() : 0);
        return offset + local_.intern(s);
    }
    const std::string& name(std::int64_t id) const {
        const auto offset = static_cast<std::int64_t>(base_ ? base_->size() : 0);
        return id < offset ? base_->name(id) : local_.name(id - offset);
    }

private:
    const Symbols* base_;
    Symbols local_;
};

template <typename Interner>
class TermCompiler {
public:
    TermCompiler(Interner& syms, std::map<std::string, int>& vars) : syms_(syms), vars_(vars) {}

    CTerm term(const Term& t) {
        CTerm c;
        switch (t.kind()) {
        case Term::Kind::Variable: {
            c.k = CTerm::K::Var;
            if (t.name() == "_") {
                c.v = static_cast<std::int64_t>(vars_.size());
                vars_.emplace("_#" + std::to_string(vars_.size()), static_cast<int>(c.v));
            } else {
                auto [it, fresh] = vars_.emplace(t.name(), static_cast<int>(vars_.size()));
                c.v = it->second;
            }
            break;
        }
        case Term::Kind::Symbol:
            c.k = CTerm::K::Sym;
            c.v = syms_.intern(t.name());
            break;
        case Term::Kind::Int:
            c.k = CTerm::K::Int;
            c.v = t.value();
            break;
        case Term::Kind::Compound:
            c.k = CTerm::K::Fn;
            c.v = syms_.intern(t.name());
            for (const auto& a : t.args()) c.args.push_back(term(a));
            break;
        }
        return c;
    }

private:
    Interner& syms_;
    std::map<std::string, int>& vars_;
};

struct Compiled {
    Symbols syms;
    std::vector<CPred> preds;
    std::vector<CClause> clauses;
    std::map<std::pair<bool, asp::PredKey>, int> slots;
    std::int64_t plus = 0, minus = 0, times = 0;

    int slot(bool dual, const asp::PredKey& key) {
        auto [it, fresh] = slots.emplace(std::make_pair(dual, key), static_cast<int>(preds.size()));
        if (fresh) {
            CPred p;
            p.key = key;
            p.dual = dual;
            p.helper = dual && key.name.find('#') != std::string::npos;
            preds.push_back(std::move(p));
        }
        return it->second;
    }
    std::optional<int> find_slot(bool dual, const asp::PredKey& key) const {
        auto it = slots.find(std::make_pair(dual, key));
        if (it == slots.end()) return std::nullopt;
        return it->second;
    }
};

template <typename Interner, typename SlotFn>
CLit compile_literal(const asp::Literal& lit, TermCompiler<Interner>& tc, std::map<std::string, int>& vars,
                     SlotFn&& slot) {
    CLit c;
    if (const auto* p = std::get_if<asp::PosLit>(&lit)) {
        c.k = CLit::K::Call;
        c.pred = slot(p->atom.dual, p->atom.key());
        for (const auto& a : p->atom.args) c.args.push_back(tc.term(a));
    } else if (const auto* n = std::get_if<asp::NafLit>(&lit)) {
        c.k = CLit::K::Call;
        c.naf = true;
        c.pred = slot(true, n->atom.key());
        for (const auto& a : n->atom.args) c.args.push_back(tc.term(a));
    } else if (const auto* m = std::get_if<asp::CmpLit>(&lit)) {
        c.k = CLit::K::Cmp;
        c.op = m->op;
        c.lhs = tc.term(m->lhs);
        c.rhs = tc.term(m->rhs);
    } else {
        const auto& f = std::get<asp::ForallLit>(lit);
        c.k = CLit::K::Forall;
        c.fvar = tc.term(Term::var(f.var)).v;
        for (const auto& v : f.domain.values) c.fvalues.push_back(tc.term(v));
        c.finterval = f.domain.is_interval;
        c.flo = f.domain.lo;
        c.fhi = f.domain.hi;
        c.inner.push_back(compile_literal(asp::Literal{asp::PosLit{f.goal}}, tc, vars, slot));
    }
    return c;
}

void finalize_frames(std::vector<CLit>& body, int nvars) {
    for (auto& l : body)
        if (l.k == CLit::K::Forall) l.frame = nvars;
}

std::unique_ptr<Compiled> compile_program(const asp::DualProgram& dp) {
    auto out = std::make_unique<Compiled>();
    auto& c = *out;
    c.plus = c.syms.intern("+");
    c.minus = c.syms.intern("-");
    c.times = c.syms.intern("*");
    for (const auto& key : dp.original().predicates()) {
        c.slot(false, key);
        c.slot(true, key);
    }
    auto add = [&](const asp::Rule& r, bool dual) {
        CClause cl;
        std::map<std::string, int> vars;
        TermCompiler<Symbols> tc(c.syms, vars);
        for (const auto& a : r.head.args) cl.head.push_back(tc.term(a));
        auto slot = [&](bool d, const asp::PredKey& k) { return c.slot(d, k); };
        for (const auto& l : r.body) cl.body.push_back(compile_literal(l, tc, vars, slot));
        cl.nvars = static_cast<int>(vars.size());
        finalize_frames(cl.body, cl.nvars);
        cl.text = asp::to_string(r);
        const int s = c.slot(dual, r.head.key());
        c.preds[static_cast<std::size_t>(s)].clauses.push_back(static_cast<int>(c.clauses.size()));
        c.clauses.push_back(std::move(cl));
    };
    for (const auto& r : dp.original().rules()) add(r, false);
    for (const auto& r : dp.duals()) add(r, true);

    for (auto& p : c.preds) {
        std::set<std::pair<int, std::int64_t>> keys;
        for (int ci : p.clauses) {
            const auto& h = c.clauses[static_cast<std::size_t>(ci)].head;
            if (h.empty()) continue;
            if (h[0].k == CTerm::K::Sym || h[0].k == CTerm::K::Int) keys.insert({static_cast<int>(h[0].k), h[0].v});
        }
        for (int ci : p.clauses) {
            const auto& h = c.clauses[static_cast<std::size_t>(ci)].head;
            const bool constant = !h.empty() && (h[0].k == CTerm::K::Sym || h[0].k == CTerm::K::Int);
            if (!constant) {
                p.var_first.push_back(ci);
                for (const auto& k : keys) p.by_first[k].push_back(ci);
            } else {
                p.by_first[{static_cast<int>(h[0].k), h[0].v}].push_back(ci);
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Evaluation context

struct Ref {
    const CTerm* t = nullptr;
    int base = 0;
};

struct VarState {
    enum class K : std::uint8_t { Open, Alias, Bound, Num, Syms };
    K k = K::Open;
    int alias = -1;
    Ref val;
    std::shared_ptr<const NumericSet> num;
    std::shared_ptr<const std::vector<std::int64_t>> syms;
    std::shared_ptr<const std::vector<Ref>> excl;
};

// Dereferenced term: an unbound variable id or a non-variable term.
struct D {
    int var = -1;
    Ref term;
};

struct Goal;
using GoalPtr = std::shared_ptr<const Goal>;
struct Goal {
    const CLit* lit;
    int base;
    int parent;  // trace node of the goal this one is a child of
    std::int64_t forall_k = 0;
    GoalPtr next;
};

struct TNode {
    int parent;
    const CLit* lit;
    int base;
    DerivationNode::Via via;
    int clause = -1;
    bool splice = false;
};

struct Mark {
    std::size_t trail, vars, trace, arena;
};

enum class Outcome : std::uint8_t { Fail, Ok, Label };

struct Decision {
    Outcome outcome;
    int var = -1;
};

class Context {
public:
    Context(const Compiled* program, LocalSymbols& syms) : prog_(program), syms_(syms) {}

    // ----- variable store
    int alloc(int n) {
        const int base = static_cast<int>(vars_.size());
        vars_.resize(vars_.size() + static_cast<std::size_t>(n));
        return base;
    }
    Mark mark() const { return {trail_.size(), vars_.size(), trace_.size(), arena_.size()}; }
    void undo(const Mark& m) {
        while (trail_.size() > m.trail) {
            auto& [id, st] = trail_.back();
            if (static_cast<std::size_t>(id) < vars_.size()) vars_[static_cast<std::size_t>(id)] = std::move(st);
            trail_.pop_back();
        }
        vars_.resize(m.vars);
        trace_.resize(m.trace);
        arena_.resize(m.arena);
    }
    const VarState& state(int id) const { return vars_[static_cast<std::size_t>(id)]; }
    void assign(int id, VarState st) {
        trail_.emplace_back(id, std::move(vars_[static_cast<std::size_t>(id)]));
        vars_[static_cast<std::size_t>(id)] = std::move(st);
    }

    const CTerm* make_int(std::int64_t v) {
        CTerm t;
        t.k = CTerm::K::Int;
        t.v = v;
        arena_.push_back(std::move(t));
        return &arena_.back();
    }
    const CTerm* make_sym(std::int64_t id) {
        CTerm t;
        t.k = CTerm::K::Sym;
        t.v = id;
        arena_.push_back(std::move(t));
        return &arena_.back();
    }
    const CTerm* keep(CTerm t) {
        arena_.push_back(std::move(t));
        return &arena_.back();
    }

    D deref(Ref r) const {
        while (r.t->k == CTerm::K::Var) {
            int id = r.base + static_cast<int>(r.t->v);
            for (;;) {
                const auto& s = state(id);
                if (s.k == VarState::K::Alias) {
                    id = s.alias;
                    continue;
                }
                if (s.k == VarState::K::Bound) {
                    r = s.val;
                    break;
                }
                return D{id, {}};
            }
        }
        return D{-1, r};
    }

    bool identical(Ref a, Ref b) const {
        const D da = deref(a), db = deref(b);
        if (da.var >= 0 || db.var >= 0) return da.var == db.var;
        const auto& x = *da.term.t;
        const auto& y = *db.term.t;
        if (x.k != y.k || x.v != y.v || x.args.size() != y.args.size()) return false;
        for (std::size_t i = 0; i < x.args.size(); ++i)
            if (!identical({&x.args[i], da.term.base}, {&y.args[i], db.term.base})) return false;
        return true;
    }

    bool ground(Ref r) const {
        const D d = deref(r);
        if (d.var >= 0) return false;
        for (const auto& a : d.term.t->args)
            if (!ground({&a, d.term.base})) return false;
        return true;
    }

    void collect_unbound(Ref r, std::vector<int>& out) const {
        const D d = deref(r);
        if (d.var >= 0) {
            if (std::find(out.begin(), out.end(), d.var) == out.end()) out.push_back(d.var);
            return;
        }
        for (const auto& a : d.term.t->args) collect_unbound({&a, d.term.base}, out);
    }

    // ----- domains
    bool set_num(int id, NumericSet s) {
        if (s.empty()) return false;
        VarState st;
        if (s.is_point()) {
            st.k = VarState::K::Bound;
            st.val = {make_int(s.min()), 0};
        } else {
            st.k = VarState::K::Num;
            st.num = std::make_shared<const NumericSet>(std::move(s));
        }
        assign(id, std::move(st));
        return true;
    }
    bool set_syms(int id, std::vector<std::int64_t> s) {
        if (s.empty()) return false;
        VarState st;
        if (s.size() == 1) {
            st.k = VarState::K::Bound;
            st.val = {make_sym(s[0]), 0};
        } else {
            st.k = VarState::K::Syms;
            st.syms = std::make_shared<const std::vector<std::int64_t>>(std::move(s));
        }
        assign(id, std::move(st));
        return true;
    }
    void alias(int from, int to) {
        VarState st;
        st.k = VarState::K::Alias;
        st.alias = to;
        assign(from, std::move(st));
    }

    NumericSet open_numeric(const VarState& s) const {
        auto set = NumericSet::all();
        if (s.excl)
            for (const auto& e : *s.excl) {
                const D d = deref(e);
                if (d.var < 0 && d.term.t->k == CTerm::K::Int) set = set.without(d.term.t->v);
            }
        return set;
    }

    // ----- unification
    bool bind_var(int id, Ref t) {
        const auto& s = state(id);
        const auto& term = *t.t;
        switch (s.k) {
        case VarState::K::Open:
            if (s.excl)
                for (const auto& e : *s.excl)
                    if (identical(e, t)) return false;
            break;
        case VarState::K::Num:
            if (term.k != CTerm::K::Int || !s.num->contains(term.v)) return false;
            break;
        case VarState::K::Syms:
            if (term.k != CTerm::K::Sym || std::find(s.syms->begin(), s.syms->end(), term.v) == s.syms->end())
                return false;
            break;
        default:
            return false;
        }
        VarState st;
        st.k = VarState::K::Bound;
        st.val = t;
        assign(id, std::move(st));
        return true;
    }

    bool merge(int a, int b) {
        const auto sa = state(a);
        const auto sb = state(b);
        using K = VarState::K;
        if (sa.k == K::Open && sb.k == K::Open) {
            if (sa.excl && !sa.excl->empty()) {
                auto ex = sb.excl ? *sb.excl : std::vector<Ref>{};
                for (const auto& e : *sa.excl) ex.push_back(e);
                VarState st = sb;
                st.excl = std::make_shared<const std::vector<Ref>>(std::move(ex));
                assign(b, std::move(st));
            }
            alias(a, b);
            return true;
        }
        if (sa.k != K::Open && sb.k == K::Open) return merge(b, a);
        if (sa.k == K::Open) {
            if (sb.k == K::Num) {
                auto set = *sb.num;
                if (sa.excl)
                    for (const auto& e : *sa.excl) {
                        const D d = deref(e);
                        if (d.var < 0 && d.term.t->k == CTerm::K::Int) set = set.without(d.term.t->v);
                    }
                alias(a, b);
                return set == *sb.num || set_num(b, std::move(set));
            }
            auto list = *sb.syms;
            if (sa.excl)
                for (const auto& e : *sa.excl) {
                    const D d = deref(e);
                    if (d.var < 0 && d.term.t->k == CTerm::K::Sym) std::erase(list, d.term.t->v);
                }
            alias(a, b);
            return list.size() == sb.syms->size() || set_syms(b, std::move(list));
        }
        if (sa.k == K::Num && sb.k == K::Num) {
            auto set = sa.num->intersect(*sb.num);
            alias(a, b);
            return set_num(b, std::move(set));
        }
        if (sa.k == K::Syms && sb.k == K::Syms) {
            std::vector<std::int64_t> list;
            for (auto v : *sb.syms)
                if (std::find(sa.syms->begin(), sa.syms->end(), v) != sa.syms->end()) list.push_back(v);
            alias(a, b);
            return set_syms(b, std::move(list));
        }
        return false;
    }

    bool unify(Ref a, Ref b) {
        const D da = deref(a), db = deref(b);
        if (da.var >= 0 && db.var >= 0) return da.var == db.var || merge(da.var, db.var);
        if (da.var >= 0) return bind_var(da.var, db.term);
        if (db.var >= 0) return bind_var(db.var, da.term);
        const auto& x = *da.term.t;
        const auto& y = *db.term.t;
        if (x.k != y.k || x.v != y.v || x.args.size() != y.args.size()) return false;
        for (std::size_t i = 0; i < x.args.size(); ++i)
            if (!unify({&x.args[i], da.term.base}, {&y.args[i], db.term.base})) return false;
        return true;
    }

    // ----- constraints
    bool is_arith(const CTerm& t) const {
        return t.k == CTerm::K::Fn && t.args.size() == 2 &&
               (t.v == prog_->plus || t.v == prog_->minus || t.v == prog_->times);
    }

    struct Num {
        bool is_var = false;
        int var = -1;
        std::int64_t value = 0;
        int label = -1;  // set when a variable must be labeled first
    };

    static std::int64_t saturate(__int128 v) {
        if (v > NumericSet::kMax) return NumericSet::kMax;
        if (v < NumericSet::kMin) return NumericSet::kMin;
        return static_cast<std::int64_t>(v);
    }

    // Numeric view of an operand. Plain variables stay variables; arithmetic
    // is evaluated once all its variables are bound.
    Num numeric(Ref r, bool allow_var) {
        const D d = deref(r);
        if (d.var >= 0) {
            const auto& s = state(d.var);
            if (s.k == VarState::K::Syms)
                throw TypeMismatch("arithmetic comparison on categorical variable");
            if (allow_var) return Num{true, d.var, 0, -1};
            if (s.k == VarState::K::Num && s.num->bounded() && s.num->size() <= kLabelCap) return Num{false, -1, 0, d.var};
            throw InstantiationError("arithmetic over an unbounded variable");
        }
        const auto& t = *d.term.t;
        if (t.k == CTerm::K::Int) return Num{false, -1, t.v, -1};
        if (t.k == CTerm::K::Sym) throw TypeMismatch("ordered comparison on symbol '" + syms_.name(t.v) + "'");
        if (!is_arith(t)) throw TypeMismatch("ordered comparison on a compound term");
        const auto x = numeric({&t.args[0], d.term.base}, false);
        if (x.label >= 0) return x;
        const auto y = numeric({&t.args[1], d.term.base}, false);
        if (y.label >= 0) return y;
        __int128 v = 0;
        if (t.v == prog_->plus) v = static_cast<__int128>(x.value) + y.value;
        else if (t.v == prog_->minus) v = static_cast<__int128>(x.value) - y.value;
        else v = static_cast<__int128>(x.value) * y.value;
        return Num{false, -1, saturate(v), -1};
    }

    static bool compare(CmpOp op, std::int64_t a, std::int64_t b) {
        switch (op) {
        case CmpOp::Ge: return a >= b;
        case CmpOp::Le: return a <= b;
        case CmpOp::Gt: return a > b;
        case CmpOp::Lt: return a < b;
        case CmpOp::ArithEq:
        case CmpOp::Eq: return a == b;
        default: return a != b;
        }
    }

    static CmpOp mirror(CmpOp op) {
        switch (op) {
        case CmpOp::Ge: return CmpOp::Le;
        case CmpOp::Le: return CmpOp::Ge;
        case CmpOp::Gt: return CmpOp::Lt;
        case CmpOp::Lt: return CmpOp::Gt;
        default: return op;
        }
    }

    NumericSet numeric_domain(int id) const {
        const auto& s = state(id);
        if (s.k == VarState::K::Num) return *s.num;
        return open_numeric(s);
    }

    // Smallest finite domain among candidates, for labeling.
    int pick_label(const std::vector<int>& candidates) const {
        int best = -1;
        std::uint64_t best_size = 0;
        for (int v : candidates) {
            const auto& s = state(v);
            std::uint64_t size = 0;
            if (s.k == VarState::K::Num && s.num->bounded() && s.num->size() <= kLabelCap) size = s.num->size();
            else if (s.k == VarState::K::Syms) size = s.syms->size();
            else continue;
            if (best < 0 || size < best_size) {
                best = v;
                best_size = size;
            }
        }
        return best;
    }

    Decision ordered(CmpOp op, Ref l, Ref r) {
        const auto a = numeric(l, true);
        if (a.label >= 0) return {Outcome::Label, a.label};
        const auto b = numeric(r, true);
        if (b.label >= 0) return {Outcome::Label, b.label};
        if (!a.is_var && !b.is_var) return {compare(op, a.value, b.value) ? Outcome::Ok : Outcome::Fail};
        if (a.is_var && b.is_var) {
            if (a.var == b.var)
                return {(op == CmpOp::Ge || op == CmpOp::Le) ? Outcome::Ok : Outcome::Fail};
            const int v = pick_label({a.var, b.var});
            if (v < 0) throw InstantiationError("comparison between two unbounded variables");
            return {Outcome::Label, v};
        }
        const int var = a.is_var ? a.var : b.var;
        const std::int64_t k = a.is_var ? b.value : a.value;
        const CmpOp o = a.is_var ? op : mirror(op);
        auto set = numeric_domain(var);
        switch (o) {
        case CmpOp::Ge: set = set.at_least(k); break;
        case CmpOp::Le: set = set.at_most(k); break;
        case CmpOp::Gt: set = k == NumericSet::kMax ? NumericSet{} : set.at_least(k + 1); break;
        case CmpOp::Lt: set = k == NumericSet::kMin ? NumericSet{} : set.at_most(k - 1); break;
        default: break;
        }
        if (state(var).k == VarState::K::Num && set == *state(var).num) return {Outcome::Ok};
        return {set_num(var, std::move(set)) ? Outcome::Ok : Outcome::Fail};
    }

    Decision arith_eq(Ref l, Ref r) {
        const auto a = numeric(l, true);
        if (a.label >= 0) return {Outcome::Label, a.label};
        const auto b = numeric(r, true);
        if (b.label >= 0) return {Outcome::Label, b.label};
        if (!a.is_var && !b.is_var) return {a.value == b.value ? Outcome::Ok : Outcome::Fail};
        if (a.is_var && b.is_var) return {a.var == b.var || merge(a.var, b.var) ? Outcome::Ok : Outcome::Fail};
        const int var = a.is_var ? a.var : b.var;
        const auto k = a.is_var ? b.value : a.value;
        return {bind_var(var, {make_int(k), 0}) ? Outcome::Ok : Outcome::Fail};
    }

    // Constructive disequality between an unbound variable and a ground term.
    bool exclude(int var, Ref t) {
        const auto& s = state(var);
        const auto& term = *deref(t).term.t;
        if (s.k == VarState::K::Num) {
            if (term.k != CTerm::K::Int) return true;
            if (!s.num->contains(term.v)) return true;
            return set_num(var, s.num->without(term.v));
        }
        if (s.k == VarState::K::Syms) {
            if (term.k != CTerm::K::Sym) return true;
            auto list = *s.syms;
            if (std::find(list.begin(), list.end(), term.v) == list.end()) return true;
            std::erase(list, term.v);
            return set_syms(var, std::move(list));
        }
        if (s.excl)
            for (const auto& e : *s.excl)
                if (identical(e, t)) return true;
        VarState st = s;
        auto ex = s.excl ? *s.excl : std::vector<Ref>{};
        ex.push_back(deref(t).term);
        st.excl = std::make_shared<const std::vector<Ref>>(std::move(ex));
        assign(var, std::move(st));
        return true;
    }

    Decision neq(Ref l, Ref r) {
        const D a = deref(l), b = deref(r);
        if (a.var >= 0 && b.var >= 0) {
            if (a.var == b.var) return {Outcome::Fail};
            const auto& sa = state(a.var);
            const auto& sb = state(b.var);
            if ((sa.k == VarState::K::Num && sb.k == VarState::K::Syms) ||
                (sa.k == VarState::K::Syms && sb.k == VarState::K::Num))
                return {Outcome::Ok};
            const int v = pick_label({a.var, b.var});
            // Two unconstrained variables can always be made equal.
            if (v < 0) return {Outcome::Fail};
            return {Outcome::Label, v};
        }
        if (a.var >= 0 && ground(b.term)) return {exclude(a.var, b.term) ? Outcome::Ok : Outcome::Fail};
        if (b.var >= 0 && ground(a.term)) return {exclude(b.var, a.term) ? Outcome::Ok : Outcome::Fail};

        const Mark m = mark();
        const bool unifiable = unify(l, r);
        const bool changed = trail_.size() != m.trail;
        undo(m);
        if (!unifiable) return {Outcome::Ok};
        if (!changed) return {Outcome::Fail};
        std::vector<int> vs;
        collect_unbound(l, vs);
        collect_unbound(r, vs);
        const int v = pick_label(vs);
        if (v < 0) return {Outcome::Fail};
        return {Outcome::Label, v};
    }

    Decision arith_neq(Ref l, Ref r) {
        const auto a = numeric(l, true);
        if (a.label >= 0) return {Outcome::Label, a.label};
        const auto b = numeric(r, true);
        if (b.label >= 0) return {Outcome::Label, b.label};
        if (!a.is_var && !b.is_var) return {a.value != b.value ? Outcome::Ok : Outcome::Fail};
        if (a.is_var && b.is_var) {
            if (a.var == b.var) return {Outcome::Fail};
            const int v = pick_label({a.var, b.var});
            if (v < 0) throw InstantiationError("disequality between two unbounded variables");
            return {Outcome::Label, v};
        }
        const int var = a.is_var ? a.var : b.var;
        const auto k = a.is_var ? b.value : a.value;
        auto set = numeric_domain(var).without(k);
        if (state(var).k == VarState::K::Num && set == *state(var).num) return {Outcome::Ok};
        return {set_num(var, std::move(set)) ? Outcome::Ok : Outcome::Fail};
    }

    Decision constraint(CmpOp op, Ref l, Ref r) {
        switch (op) {
        case CmpOp::Eq: return {unify(l, r) ? Outcome::Ok : Outcome::Fail};
        case CmpOp::Neq: return neq(l, r);
        case CmpOp::ArithEq: return arith_eq(l, r);
        case CmpOp::ArithNeq: return arith_neq(l, r);
        default: return ordered(op, l, r);
        }
    }

    // Values of a finite-domain variable in labeling order.
    std::vector<Ref> label_values(int id) {
        std::vector<Ref> out;
        const auto& s = state(id);
        if (s.k == VarState::K::Syms) {
            const auto list = *s.syms;
            for (auto v : list) out.push_back({make_sym(v), 0});
            return out;
        }
        const auto set = *s.num;
        if (!set.bounded() || set.size() > kLabelCap)
            throw InstantiationError("cannot enumerate the domain " + set.str());
        for (const auto& iv : set.intervals())
            for (std::int64_t v = iv.lo;; ++v) {
                out.push_back({make_int(v), 0});
                if (v == iv.hi) break;
            }
        return out;
    }

    // ----- export
    std::optional<Term> to_term(Ref r, std::map<int, Binding>* extra) const {
        const D d = deref(r);
        if (d.var >= 0) {
            if (extra) export_var(d.var, *extra);
            return Term::var("_G" + std::to_string(d.var));
        }
        const auto& t = *d.term.t;
        switch (t.k) {
        case CTerm::K::Sym: return Term::sym(syms_.name(t.v));
        case CTerm::K::Int: return Term::integer(t.v);
        case CTerm::K::Fn: {
            std::vector<Term> args;
            for (const auto& a : t.args) args.push_back(*to_term({&a, d.term.base}, extra));
            return Term::compound(syms_.name(t.v), std::move(args));
        }
        default: return std::nullopt;
        }
    }

    Binding binding_of(int id, std::map<int, Binding>* extra) const {
        const auto& s = state(id);
        switch (s.k) {
        case VarState::K::Num: return *s.num;
        case VarState::K::Syms: {
            std::vector<std::string> names;
            for (auto v : *s.syms) names.push_back(syms_.name(v));
            return SymbolSet(std::move(names));
        }
        default: {
            Open o;
            if (s.excl)
                for (const auto& e : *s.excl) o.excluded.push_back(*to_term(e, extra));
            std::sort(o.excluded.begin(), o.excluded.end());
            o.excluded.erase(std::unique(o.excluded.begin(), o.excluded.end()), o.excluded.end());
            return o;
        }
        }
    }

    void export_var(int id, std::map<int, Binding>& extra) const {
        if (extra.count(id)) return;
        extra.emplace(id, Open{});
        extra[id] = binding_of(id, &extra);
    }

    Binding export_binding(Ref r, std::map<int, Binding>& extra) const {
        const D d = deref(r);
        if (d.var >= 0) return binding_of(d.var, &extra);
        return *to_term(r, &extra);
    }

    // ----- trace
    std::vector<TNode>& trace_nodes() { return trace_; }

    const Compiled* prog_;
    LocalSymbols& syms_;

private:
    std::vector<VarState> vars_;
    std::vector<std::pair<int, VarState>> trail_;
    std::vector<TNode> trace_;
    std::deque<CTerm> arena_;
};

// ---------------------------------------------------------------------------
// Resolution

struct QueryVar {
    std::string name;
    int id;
};

class Engine {
public:
    Engine(const Compiled& prog, Context& ctx, const SolveOptions& opts, std::vector<QueryVar> qvars,
           const std::function<bool(const Answer&)>& sink)
        : prog_(prog), ctx_(ctx), opts_(opts), qvars_(std::move(qvars)), sink_(sink) {}

    void run_query(GoalPtr goals) { run(std::move(goals)); }

private:
    void step() {
        if (++steps_ > opts_.step_budget)
            throw DepthLimitExceeded("resolution step budget of " + std::to_string(opts_.step_budget) +
                                     " exhausted before the next answer");
    }

    int add_node(int parent, const CLit* lit, int base, DerivationNode::Via via, int clause, bool splice) {
        if (!opts_.trace) return -1;
        auto& nodes = ctx_.trace_nodes();
        nodes.push_back(TNode{parent, lit, base, via, clause, splice});
        return static_cast<int>(nodes.size()) - 1;
    }

    static GoalPtr push_body(const std::vector<CLit>& body, int base, int parent, GoalPtr next) {
        for (auto it = body.rbegin(); it != body.rend(); ++it)
            next = std::make_shared<const Goal>(Goal{&*it, base, parent, 0, std::move(next)});
        return next;
    }

    // Returns false once the caller should stop producing answers.
    bool run(GoalPtr goals) {
        for (;;) {
            if (!goals) return emit();
            step();
            const Goal& g = *goals;
            const CLit& lit = *g.lit;
            switch (lit.k) {
            case CLit::K::Cmp: {
                const Mark m = ctx_.mark();
                const auto d = ctx_.constraint(lit.op, {&lit.lhs, g.base}, {&lit.rhs, g.base});
                if (d.outcome == Outcome::Fail) return true;
                if (d.outcome == Outcome::Label) {
                    ctx_.undo(m);
                    for (const auto& v : ctx_.label_values(d.var)) {
                        const Mark lm = ctx_.mark();
                        step();
                        if (ctx_.bind_var(d.var, v) && !run(goals)) return false;
                        ctx_.undo(lm);
                    }
                    return true;
                }
                add_node(g.parent, &lit, g.base, DerivationNode::Via::Constraint, -1, false);
                goals = g.next;
                continue;
            }
            case CLit::K::Forall: {
                const std::int64_t count = lit.finterval ? (lit.fhi - lit.flo + 1)
                                                         : static_cast<std::int64_t>(lit.fvalues.size());
                int parent = g.parent;
                if (g.forall_k == 0) parent = add_node(g.parent, &lit, g.base, DerivationNode::Via::Forall, -1, false);
                if (g.forall_k >= count) {
                    goals = g.next;
                    continue;
                }
                const int nb = ctx_.alloc(lit.frame);
                for (int i = 0; i < lit.frame; ++i)
                    if (i != lit.fvar) ctx_.alias(nb + i, g.base + i);
                const Ref value = lit.finterval ? Ref{ctx_.make_int(lit.flo + g.forall_k), 0}
                                                : Ref{&lit.fvalues[static_cast<std::size_t>(g.forall_k)], nb};
                VarState st;
                st.k = VarState::K::Bound;
                st.val = value;
                ctx_.assign(nb + lit.fvar, std::move(st));
                auto rest = std::make_shared<const Goal>(Goal{&lit, g.base, parent, g.forall_k + 1, g.next});
                goals = std::make_shared<const Goal>(Goal{&lit.inner[0], nb, parent, 0, std::move(rest)});
                continue;
            }
            case CLit::K::Call: break;
            }

            const CPred& pred = prog_.preds[static_cast<std::size_t>(lit.pred)];
            const std::vector<int>* candidates = &pred.clauses;
            if (!lit.args.empty() && !pred.by_first.empty()) {
                const D first = ctx_.deref({&lit.args[0], g.base});
                if (first.var < 0 && (first.term.t->k == CTerm::K::Sym || first.term.t->k == CTerm::K::Int)) {
                    auto it = pred.by_first.find({static_cast<int>(first.term.t->k), first.term.t->v});
                    candidates = it == pred.by_first.end() ? &pred.var_first : &it->second;
                }
            }
            if (candidates->empty()) return true;
            const auto via = lit.naf ? DerivationNode::Via::Dual : DerivationNode::Via::Rule;
            for (std::size_t c = 0; c < candidates->size(); ++c) {
                const int ci = (*candidates)[c];
                const CClause& cl = prog_.clauses[static_cast<std::size_t>(ci)];
                const bool last = c + 1 == candidates->size();
                const Mark m = ctx_.mark();
                const int nb = ctx_.alloc(cl.nvars);
                bool ok = true;
                for (std::size_t j = 0; ok && j < cl.head.size(); ++j)
                    ok = ctx_.unify({&cl.head[j], nb}, {&lit.args[j], g.base});
                if (ok) {
                    const auto node_via = cl.body.empty() && !lit.naf ? DerivationNode::Via::Fact : via;
                    const int node = add_node(g.parent, &lit, g.base, node_via, ci, pred.helper);
                    auto next = push_body(cl.body, nb, opts_.trace ? node : -1, g.next);
                    if (last) {
                        goals = std::move(next);
                        break;
                    }
                    if (!run(std::move(next))) return false;
                } else if (last) {
                    return true;
                }
                step();
                ctx_.undo(m);
            }
        }
    }

    bool emit() {
        // Two query variables sharing one set-valued variable would leave an
        // alias in the answer; enumerate the shared variable instead.
        std::map<int, int> seen;
        for (const auto& q : qvars_) {
            const D d = ctx_.deref({&var_term(q.id), 0});
            if (d.var < 0) continue;
            const auto k = ctx_.state(d.var).k;
            if (k != VarState::K::Num && k != VarState::K::Syms) continue;
            if (seen.count(d.var)) {
                for (const auto& v : ctx_.label_values(d.var)) {
                    const Mark m = ctx_.mark();
                    if (ctx_.bind_var(d.var, v) && !emit()) return false;
                    ctx_.undo(m);
                }
                return true;
            }
            seen[d.var] = q.id;
        }

        Answer ans;
        std::map<int, Binding> extra;
        for (const auto& q : qvars_) ans.substitution.bindings[q.name] = ctx_.export_binding({&var_term(q.id), 0}, extra);
        for (auto& [id, b] : extra) ans.substitution.bindings["_G" + std::to_string(id)] = std::move(b);
        auto key = ans.substitution.str();
        if (!answers_.insert(key).second) return true;
        if (opts_.trace) ans.derivation = std::make_shared<const DerivationNode>(build_trace());
        steps_ = 0;
        ++count_;
        if (!sink_(ans)) return false;
        return !(opts_.limit && count_ >= *opts_.limit);
    }

    const CTerm& var_term(int id) {
        while (var_terms_.size() <= static_cast<std::size_t>(id)) {
            CTerm t;
            t.k = CTerm::K::Var;
            t.v = static_cast<std::int64_t>(var_terms_.size());
            var_terms_.push_back(std::move(t));
        }
        return var_terms_[static_cast<std::size_t>(id)];
    }

    asp::Literal render_literal(const CLit& lit, int base) const {
        auto term = [&](const CTerm& t) { return *ctx_.to_term({&t, base}, nullptr); };
        if (lit.k == CLit::K::Cmp) return asp::CmpLit{lit.op, term(lit.lhs), term(lit.rhs)};
        if (lit.k == CLit::K::Forall) {
            asp::ForallLit f;
            f.var = "_";
            f.domain.is_interval = lit.finterval;
            f.domain.lo = lit.flo;
            f.domain.hi = lit.fhi;
            const auto& inner = lit.inner[0];
            const auto& p = prog_.preds[static_cast<std::size_t>(inner.pred)];
            f.goal.pred = p.key.name;
            f.goal.dual = p.dual;
            for (const auto& a : inner.args) f.goal.args.push_back(term(a));
            return f;
        }
        const auto& p = prog_.preds[static_cast<std::size_t>(lit.pred)];
        asp::Atom atom{p.key.name, {}, p.dual && !lit.naf};
        for (const auto& a : lit.args) atom.args.push_back(term(a));
        if (lit.naf) return asp::NafLit{std::move(atom)};
        return asp::PosLit{std::move(atom)};
    }

    DerivationNode build_trace() const {
        const auto& nodes = ctx_.trace_nodes();
        std::vector<std::vector<int>> children(nodes.size());
        std::vector<int> top;
        auto effective_parent = [&](int p) {
            while (p >= 0 && nodes[static_cast<std::size_t>(p)].splice) p = nodes[static_cast<std::size_t>(p)].parent;
            return p;
        };
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            if (nodes[i].splice) continue;
            const int p = effective_parent(nodes[i].parent);
            (p < 0 ? top : children[static_cast<std::size_t>(p)]).push_back(static_cast<int>(i));
        }
        std::function<DerivationNode(int)> build = [&](int i) {
            const auto& n = nodes[static_cast<std::size_t>(i)];
            DerivationNode d;
            d.goal = render_literal(*n.lit, n.base);
            d.via = n.via;
            if (n.clause >= 0) d.rule = prog_.clauses[static_cast<std::size_t>(n.clause)].text;
            for (int c : children[static_cast<std::size_t>(i)]) d.children.push_back(build(c));
            return d;
        };
        if (top.size() == 1) return build(top[0]);
        DerivationNode root;
        root.goal = asp::PosLit{asp::Atom{"query", {}, false}};
        root.via = DerivationNode::Via::Rule;
        for (int t : top) root.children.push_back(build(t));
        return root;
    }

    const Compiled& prog_;
    Context& ctx_;
    const SolveOptions& opts_;
    std::vector<QueryVar> qvars_;
    const std::function<bool(const Answer&)>& sink_;
    std::set<std::string> answers_;
    std::size_t steps_ = 0;
    std::size_t count_ = 0;
    std::deque<CTerm> var_terms_;
};

// Loads a public substitution into fresh context variables.
class Loader {
public:
    Loader(Context& ctx, LocalSymbols& syms, std::map<std::string, int>& vars) : ctx_(ctx), syms_(syms), vars_(vars) {}

    void load(const Substitution& s, int base) {
        for (const auto& [name, b] : s.bindings) {
            const int id = base + vars_.at(name);
            if (const auto* t = std::get_if<Term>(&b)) {
                std::map<std::string, int> dummy = vars_;
                TermCompiler<LocalSymbols> tc(syms_, dummy);
                auto c = tc.term(*t);
                if (dummy.size() != vars_.size()) throw Error("substitution term uses unknown variables");
                const CTerm* k = ctx_.keep(std::move(c));
                if (!ctx_.unify({k, base}, {&var_ref(id - base), base})) failed_ = true;
            } else if (const auto* n = std::get_if<NumericSet>(&b)) {
                if (!ctx_.set_num(ctx_.deref({&var_ref(id - base), base}).var, *n)) failed_ = true;
            } else if (const auto* y = std::get_if<SymbolSet>(&b)) {
                std::vector<std::int64_t> ids;
                for (const auto& v : y->values()) ids.push_back(syms_.intern(v));
                if (!ctx_.set_syms(ctx_.deref({&var_ref(id - base), base}).var, std::move(ids))) failed_ = true;
            } else {
                for (const auto& e : std::get<Open>(b).excluded) {
                    std::map<std::string, int> dummy;
                    TermCompiler<LocalSymbols> tc(syms_, dummy);
                    const CTerm* k = ctx_.keep(tc.term(e));
                    const D d = ctx_.deref({&var_ref(id - base), base});
                    if (d.var >= 0 && !ctx_.exclude(d.var, {k, 0})) failed_ = true;
                }
            }
            if (failed_) return;
        }
    }
    bool failed() const { return failed_; }

    const CTerm& var_ref(int local) {
        while (vterms_.size() <= static_cast<std::size_t>(local)) {
            CTerm t;
            t.k = CTerm::K::Var;
            t.v = static_cast<std::int64_t>(vterms_.size());
            vterms_.push_back(std::move(t));
        }
        return vterms_[static_cast<std::size_t>(local)];
    }

private:
    Context& ctx_;
    LocalSymbols& syms_;
    std::map<std::string, int>& vars_;
    std::deque<CTerm> vterms_;
    bool failed_ = false;
};

void collect_substitution_vars(const Substitution& s, std::map<std::string, int>& vars) {
    for (const auto& [name, b] : s.bindings) {
        vars.emplace(name, static_cast<int>(vars.size()));
        if (const auto* t = std::get_if<Term>(&b)) {
            std::vector<std::string> vs;
            t->collect_vars(vs);
            for (auto& v : vs) vars.emplace(v, static_cast<int>(vars.size()));
        }
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// Substitution

const Binding* Substitution::find(const std::string& var) const {
    auto it = bindings.find(var);
    return it == bindings.end() ? nullptr : &it->second;
}

Term Substitution::apply(const Term& t) const {
    if (t.is_var()) {
        if (const auto* b = find(t.name()))
            if (const auto* g = std::get_if<Term>(b)) return *g == t ? t : apply(*g);
        return t;
    }
    if (!t.is_compound()) return t;
    std::vector<Term> args;
    for (const auto& a : t.args()) args.push_back(apply(a));
    return Term::compound(t.name(), std::move(args));
}

std::string Substitution::str() const {
    std::string out;
    for (const auto& [name, b] : bindings) {
        if (!out.empty()) out += ", ";
        out += name;
        if (const auto* t = std::get_if<Term>(&b)) out += "=" + asp::to_string(*t);
        else if (const auto* n = std::get_if<NumericSet>(&b)) out += "∈" + n->str();
        else if (const auto* y = std::get_if<SymbolSet>(&b)) out += "∈" + y->str();
        else {
            const auto& o = std::get<Open>(b);
            if (o.excluded.empty()) out += " free";
            for (const auto& e : o.excluded) out += "≠" + asp::to_string(e);
        }
    }
    return out;
}

namespace {

Substitution export_all(Context& ctx, const std::map<std::string, int>& vars, Loader& loader) {
    Substitution out;
    std::map<int, Binding> extra;
    std::map<int, std::string> names;
    for (const auto& [name, id] : vars)
        if (name.rfind("_#", 0) != 0) names[id] = name;
    for (const auto& [id, name] : names) {
        const D d = ctx.deref({&loader.var_ref(id), 0});
        // Aliased variables export as a reference to the first name.
        if (d.var >= 0 && ctx.state(d.var).k == VarState::K::Open && !ctx.state(d.var).excl && d.var != id) {
            auto it = names.find(d.var);
            if (it != names.end()) {
                out.bindings[name] = Term::var(it->second);
                continue;
            }
        }
        if (d.var == id && ctx.state(id).k == VarState::K::Open && !ctx.state(id).excl) continue;
        out.bindings[name] = ctx.export_binding({&loader.var_ref(id), 0}, extra);
    }
    for (auto& [id, b] : extra) {
        auto it = names.find(id);
        if (it == names.end()) out.bindings["_G" + std::to_string(id)] = std::move(b);
    }
    // Rename internal references to named variables.
    for (auto& [name, b] : out.bindings)
        if (auto* t = std::get_if<Term>(&b)) {
            std::function<Term(const Term&)> fix = [&](const Term& x) -> Term {
                if (x.is_var() && x.name().rfind("_G", 0) == 0) {
                    const int id = std::stoi(x.name().substr(2));
                    auto it = names.find(id);
                    if (it != names.end()) return Term::var(it->second);
                    return x;
                }
                if (!x.is_compound()) return x;
                std::vector<Term> args;
                for (const auto& a : x.args()) args.push_back(fix(a));
                return Term::compound(x.name(), std::move(args));
            };
            *t = fix(*t);
        }
    return out;
}

template <typename Fn>
std::optional<Substitution> with_context(const Substitution& s, const std::vector<const Term*>& terms, Fn&& fn) {
    Compiled empty;
    empty.plus = empty.syms.intern("+");
    empty.minus = empty.syms.intern("-");
    empty.times = empty.syms.intern("*");
    LocalSymbols syms(&empty.syms);
    Context ctx(&empty, syms);
    std::map<std::string, int> vars;
    collect_substitution_vars(s, vars);
    std::vector<CTerm> compiled;
    {
        TermCompiler<LocalSymbols> tc(syms, vars);
        for (const auto* t : terms) compiled.push_back(tc.term(*t));
    }
    ctx.alloc(static_cast<int>(vars.size()));
    Loader loader(ctx, syms, vars);
    loader.load(s, 0);
    if (loader.failed()) return std::nullopt;
    if (!fn(ctx, compiled)) return std::nullopt;
    return export_all(ctx, vars, loader);
}

}  // namespace

std::optional<Substitution> unify(const Term& a, const Term& b, const Substitution& s) {
    return with_context(s, {&a, &b}, [](Context& ctx, const std::vector<CTerm>& t) {
        return ctx.unify({&t[0], 0}, {&t[1], 0});
    });
}

std::optional<Substitution> assert_constraint(const asp::CmpLit& c, const Substitution& s) {
    return with_context(s, {&c.lhs, &c.rhs}, [&](Context& ctx, const std::vector<CTerm>& t) {
        const Ref l{&t[0], 0}, r{&t[1], 0};
        const auto d = ctx.constraint(c.op, l, r);
        if (d.outcome != Outcome::Label) return d.outcome == Outcome::Ok;
        // Relations between two set-valued variables: keep every value of
        // the labeled variable that has some support.
        const int var = d.var;
        std::vector<std::int64_t> keep_syms;
        NumericSet keep_num;
        const bool symbolic = ctx.state(var).k == VarState::K::Syms;
        for (const auto& v : ctx.label_values(var)) {
            const Mark m = ctx.mark();
            bool ok = ctx.bind_var(var, v);
            if (ok) {
                const auto inner = ctx.constraint(c.op, l, r);
                ok = inner.outcome == Outcome::Ok || inner.outcome == Outcome::Label;
            }
            const auto& term = *v.t;
            ctx.undo(m);
            if (!ok) continue;
            if (symbolic) keep_syms.push_back(term.v);
            else keep_num = keep_num.unite(NumericSet::point(term.v));
        }
        return symbolic ? ctx.set_syms(var, std::move(keep_syms)) : ctx.set_num(var, std::move(keep_num));
    });
}

const DerivationNode& trace(const Answer& answer) {
    if (!answer.derivation) throw TraceUnavailable();
    return *answer.derivation;
}

std::string render(const DerivationNode& node) {
    std::string out;
    std::function<void(const DerivationNode&, int)> walk = [&](const DerivationNode& n, int depth) {
        out += std::string(static_cast<std::size_t>(depth) * 2, ' ') + asp::to_string(n.goal);
        switch (n.via) {
        case DerivationNode::Via::Fact: out += "  [fact]"; break;
        case DerivationNode::Via::Constraint: out += "  [constraint]"; break;
        case DerivationNode::Via::Dual: out += "  [dual]"; break;
        case DerivationNode::Via::Forall: out += "  [forall]"; break;
        case DerivationNode::Via::Rule: break;
        }
        out += "\n";
        for (const auto& c : n.children) walk(c, depth + 1);
    };
    walk(node, 0);
    return out;
}

// ---------------------------------------------------------------------------
// Solver

struct Solver::Impl {
    asp::DualProgram program;
    std::unique_ptr<Compiled> compiled;
};

Solver::Solver(asp::DualProgram program) : impl_(std::make_unique<Impl>()) {
    impl_->program = std::move(program);
    impl_->compiled = compile_program(impl_->program);
}

Solver::~Solver() = default;
Solver::Solver(Solver&&) noexcept = default;
Solver& Solver::operator=(Solver&&) noexcept = default;

const asp::DualProgram& Solver::program() const noexcept { return impl_->program; }

void Solver::solve(const std::vector<asp::Literal>& query, const SolveOptions& options,
                   const std::function<bool(const Answer&)>& on_answer) const {
    solve_with(query, {}, options, on_answer);
}

void Solver::solve_with(const std::vector<asp::Literal>& query, const Substitution& given,
                        const SolveOptions& options, const std::function<bool(const Answer&)>& on_answer) const {
    const Compiled& prog = *impl_->compiled;
    const auto& original = impl_->program.original();
    LocalSymbols syms(&prog.syms);
    Context ctx(&prog, syms);

    auto slot = [&](bool dual, const asp::PredKey& key) -> int {
        if (auto s = prog.find_slot(dual, key)) return *s;
        throw UnknownPredicateError("unknown predicate " + key.str());
    };
    for (const auto& lit : query) {
        const asp::Atom* atom = nullptr;
        if (const auto* p = std::get_if<asp::PosLit>(&lit)) atom = &p->atom;
        if (const auto* n = std::get_if<asp::NafLit>(&lit)) atom = &n->atom;
        if (atom && !atom->dual && !original.knows(atom->key()))
            throw UnknownPredicateError("unknown predicate " + atom->key().str());
    }

    std::map<std::string, int> vars;
    collect_substitution_vars(given, vars);
    std::vector<CLit> body;
    {
        TermCompiler<LocalSymbols> tc(syms, vars);
        for (const auto& lit : query) body.push_back(compile_literal(lit, tc, vars, slot));
    }
    finalize_frames(body, static_cast<int>(vars.size()));
    ctx.alloc(static_cast<int>(vars.size()));
    Loader loader(ctx, syms, vars);
    loader.load(given, 0);
    if (loader.failed()) return;

    std::vector<QueryVar> qvars;
    for (const auto& [name, id] : vars)
        if (name.rfind("_", 0) != 0) qvars.push_back({name, id});
    std::sort(qvars.begin(), qvars.end(), [](const auto& a, const auto& b) { return a.name < b.name; });

    Engine engine(prog, ctx, options, std::move(qvars), on_answer);
    GoalPtr goals;
    for (auto it = body.rbegin(); it != body.rend(); ++it)
        goals = std::make_shared<const Goal>(Goal{&*it, 0, -1, 0, std::move(goals)});
    engine.run_query(std::move(goals));
}

std::vector<Answer> Solver::solve(const std::vector<asp::Literal>& query, const SolveOptions& options) const {
    std::vector<Answer> out;
    solve(query, options, [&](const Answer& a) {
        out.push_back(a);
        return true;
    });
    return out;
}

std::vector<Answer> Solver::solve(const std::string& query, const SolveOptions& options) const {
    return solve(asp::parse_query(query), options);
}

bool Solver::holds(const std::vector<asp::Literal>& query) const {
    SolveOptions o;
    o.limit = 1;
    return !solve(query, o).empty();
}

}  // namespace cfgs::solver
