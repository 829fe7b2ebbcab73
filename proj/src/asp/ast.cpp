#include "cfgs/asp/ast.hpp"

#include "cfgs/asp/serialize.hpp"
#include "cfgs/errors.hpp"

#include <algorithm>
#include <deque>
#include <set>

namespace cfgs::asp {

bool Term::is_ground() const {
    switch (kind_) {
    case Kind::Variable: return false;
    case Kind::Compound:
        return std::all_of(args_.begin(), args_.end(), [](const Term& t) { return t.is_ground(); });
    default: return true;
    }
}

bool Term::is_arithmetic() const {
    return kind_ == Kind::Compound && args_.size() == 2 &&
           (name_ == "+" || name_ == "-" || name_ == "*");
}

void Term::collect_vars(std::vector<std::string>& out) const {
    if (kind_ == Kind::Variable) {
        if (std::find(out.begin(), out.end(), name_) == out.end()) out.push_back(name_);
    } else if (kind_ == Kind::Compound) {
        for (const auto& a : args_) a.collect_vars(out);
    }
}

bool operator<(const Term& a, const Term& b) {
    if (a.kind_ != b.kind_) return a.kind_ < b.kind_;
    switch (a.kind_) {
    case Term::Kind::Int: return a.value_ < b.value_;
    case Term::Kind::Compound:
        if (a.name_ != b.name_) return a.name_ < b.name_;
        return std::lexicographical_compare(a.args_.begin(), a.args_.end(), b.args_.begin(), b.args_.end());
    default: return a.name_ < b.name_;
    }
}

CmpOp negate(CmpOp op) {
    switch (op) {
    case CmpOp::Eq: return CmpOp::Neq;
    case CmpOp::Neq: return CmpOp::Eq;
    case CmpOp::Ge: return CmpOp::Lt;
    case CmpOp::Lt: return CmpOp::Ge;
    case CmpOp::Le: return CmpOp::Gt;
    case CmpOp::Gt: return CmpOp::Le;
    case CmpOp::ArithEq: return CmpOp::ArithNeq;
    case CmpOp::ArithNeq: return CmpOp::ArithEq;
    }
    return op;
}

const char* spelling(CmpOp op) {
    switch (op) {
    case CmpOp::Eq: return "=";
    case CmpOp::Neq: return "\\=";
    case CmpOp::Ge: return "#>=";
    case CmpOp::Le: return "#=<";
    case CmpOp::Gt: return "#>";
    case CmpOp::Lt: return "#<";
    case CmpOp::ArithEq: return "#=";
    case CmpOp::ArithNeq: return "#\\=";
    }
    return "?";
}

bool is_ordered(CmpOp op) {
    return op == CmpOp::Ge || op == CmpOp::Le || op == CmpOp::Gt || op == CmpOp::Lt;
}

namespace {

void collect_atom_vars(const Atom& a, std::vector<std::string>& out) {
    for (const auto& t : a.args) t.collect_vars(out);
}

std::vector<std::string> literal_vars(const Literal& lit) {
    std::vector<std::string> vs;
    std::visit(
        [&](const auto& l) {
            using T = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<T, CmpLit>) {
                l.lhs.collect_vars(vs);
                l.rhs.collect_vars(vs);
            } else if constexpr (std::is_same_v<T, ForallLit>) {
                std::vector<std::string> inner;
                collect_atom_vars(l.goal, inner);
                for (auto& v : inner)
                    if (v != l.var) vs.push_back(v);
            } else {
                collect_atom_vars(l.atom, vs);
            }
        },
        lit);
    return vs;
}

}  // namespace

std::vector<std::string> rule_variables(const Rule& rule) {
    std::vector<std::string> vs;
    collect_atom_vars(rule.head, vs);
    for (const auto& lit : rule.body)
        for (auto& v : literal_vars(lit))
            if (std::find(vs.begin(), vs.end(), v) == vs.end()) vs.push_back(v);
    return vs;
}

void check_range_restriction(const std::vector<Rule>& rules) {
    for (const auto& rule : rules) {
        std::set<std::string> bound;
        {
            std::vector<std::string> hv;
            collect_atom_vars(rule.head, hv);
            bound.insert(hv.begin(), hv.end());
        }
        auto require = [&](const std::vector<std::string>& vs) {
            for (const auto& v : vs)
                if (!bound.count(v)) throw RangeRestrictionError(to_string(rule), v);
        };
        for (const auto& lit : rule.body) {
            if (const auto* p = std::get_if<PosLit>(&lit)) {
                std::vector<std::string> vs;
                collect_atom_vars(p->atom, vs);
                bound.insert(vs.begin(), vs.end());
            } else if (const auto* c = std::get_if<CmpLit>(&lit)) {
                // `V = t` and `V #= expr` bind V once the other side is bound.
                if (c->op == CmpOp::Eq || c->op == CmpOp::ArithEq) {
                    std::vector<std::string> lv, rv;
                    c->lhs.collect_vars(lv);
                    c->rhs.collect_vars(rv);
                    auto all_bound = [&](const std::vector<std::string>& vs) {
                        return std::all_of(vs.begin(), vs.end(), [&](const auto& v) { return bound.count(v) != 0; });
                    };
                    if (c->lhs.is_var() && all_bound(rv)) {
                        bound.insert(c->lhs.name());
                        continue;
                    }
                    if (c->rhs.is_var() && all_bound(lv)) {
                        bound.insert(c->rhs.name());
                        continue;
                    }
                }
                require(literal_vars(lit));
            } else {
                require(literal_vars(lit));
            }
        }
    }
}

void check_stratification(const std::vector<Rule>& rules) {
    // Predicate dependency graph; an edge carries `negative` when it goes
    // through NAF.
    std::map<PredKey, std::size_t> ids;
    std::vector<PredKey> keys;
    auto id_of = [&](const PredKey& k) {
        auto [it, inserted] = ids.emplace(k, keys.size());
        if (inserted) keys.push_back(k);
        return it->second;
    };
    struct Edge {
        std::size_t to;
        bool negative;
    };
    std::vector<std::vector<Edge>> adj;
    auto add_edge = [&](std::size_t from, std::size_t to, bool neg) {
        if (adj.size() < keys.size()) adj.resize(keys.size());
        adj[from].push_back({to, neg});
    };
    for (const auto& rule : rules) {
        if (rule.head.dual) continue;
        auto h = id_of(rule.head.key());
        for (const auto& lit : rule.body) {
            if (const auto* p = std::get_if<PosLit>(&lit)) {
                if (!p->atom.dual) add_edge(h, id_of(p->atom.key()), false);
            } else if (const auto* n = std::get_if<NafLit>(&lit)) {
                add_edge(h, id_of(n->atom.key()), true);
            }
        }
    }
    adj.resize(keys.size());

    // Tarjan SCC, iterative to avoid deep recursion on long chains.
    const std::size_t n = keys.size();
    std::vector<std::size_t> index(n, SIZE_MAX), low(n, 0), comp(n, SIZE_MAX);
    std::vector<bool> on_stack(n, false);
    std::vector<std::size_t> stack;
    std::size_t counter = 0, ncomp = 0;
    for (std::size_t root = 0; root < n; ++root) {
        if (index[root] != SIZE_MAX) continue;
        std::vector<std::pair<std::size_t, std::size_t>> work{{root, 0}};
        while (!work.empty()) {
            auto& [v, ei] = work.back();
            if (ei == 0 && index[v] == SIZE_MAX) {
                index[v] = low[v] = counter++;
                stack.push_back(v);
                on_stack[v] = true;
            }
            if (ei < adj[v].size()) {
                auto w = adj[v][ei++].to;
                if (index[w] == SIZE_MAX) {
                    work.push_back({w, 0});
                } else if (on_stack[w]) {
                    low[v] = std::min(low[v], index[w]);
                }
                continue;
            }
            if (low[v] == index[v]) {
                std::size_t w;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack[w] = false;
                    comp[w] = ncomp;
                } while (w != v);
                ++ncomp;
            }
            auto done = v;
            work.pop_back();
            if (!work.empty()) low[work.back().first] = std::min(low[work.back().first], low[done]);
        }
    }

    for (std::size_t u = 0; u < n; ++u) {
        for (const auto& e : adj[u]) {
            if (!e.negative || comp[u] != comp[e.to]) continue;
            // Recover a path e.to ->* u inside the component for the message.
            std::vector<std::size_t> parent(n, SIZE_MAX);
            std::deque<std::size_t> queue{e.to};
            parent[e.to] = e.to;
            while (!queue.empty() && parent[u] == SIZE_MAX) {
                auto x = queue.front();
                queue.pop_front();
                for (const auto& f : adj[x]) {
                    if (comp[f.to] != comp[u] || parent[f.to] != SIZE_MAX) continue;
                    parent[f.to] = x;
                    queue.push_back(f.to);
                }
            }
            std::vector<std::size_t> path;
            for (auto x = u; x != e.to; x = parent[x]) path.push_back(x);
            path.push_back(e.to);
            std::reverse(path.begin(), path.end());
            std::string cycle = keys[u].str() + " -not-> ";
            for (std::size_t i = 0; i < path.size(); ++i) {
                if (i) cycle += " -> ";
                cycle += keys[path[i]].str();
            }
            throw StratificationError(cycle);
        }
    }
}

Program::Program(std::vector<Rule> rules) : rules_(std::move(rules)) {
    check_range_restriction(rules_);
    check_stratification(rules_);
    build_index();
}

Program Program::unchecked(std::vector<Rule> rules) {
    Program p;
    p.rules_ = std::move(rules);
    p.build_index();
    return p;
}

void Program::build_index() {
    index_.clear();
    referenced_.clear();
    for (std::size_t i = 0; i < rules_.size(); ++i) {
        index_[rules_[i].head.key()].push_back(i);
        for (const auto& lit : rules_[i].body) {
            if (const auto* p = std::get_if<PosLit>(&lit)) {
                if (!p->atom.dual) referenced_[p->atom.key()] = true;
            } else if (const auto* n = std::get_if<NafLit>(&lit)) {
                referenced_[n->atom.key()] = true;
            }
        }
    }
}

const std::vector<std::size_t>& Program::clauses(const PredKey& key) const {
    static const std::vector<std::size_t> none;
    auto it = index_.find(key);
    return it == index_.end() ? none : it->second;
}

bool Program::knows(const PredKey& key) const {
    return index_.count(key) != 0 || referenced_.count(key) != 0;
}

std::vector<PredKey> Program::predicates() const {
    std::set<PredKey> all;
    for (const auto& [k, _] : index_) all.insert(k);
    for (const auto& [k, _] : referenced_) all.insert(k);
    return {all.begin(), all.end()};
}

}  // namespace cfgs::asp
