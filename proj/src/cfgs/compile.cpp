#include "cfgs/compile.hpp"

#include "cfgs/errors.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace cfgs {

using asp::Atom;
using asp::CmpLit;
using asp::CmpOp;
using asp::Literal;
using asp::NafLit;
using asp::PosLit;
using asp::Rule;
using asp::Term;

std::string pre_var(std::size_t feature) {
    // X, Y and Z stay free for the cost and restriction variables.
    static const std::string letters = "ABCDEFGHIJKLMNOPQRSTUVW";
    if (feature < letters.size()) return std::string(1, letters[feature]);
    return "F" + std::to_string(feature + 1);
}

std::string post_var(std::size_t feature) {
    const auto v = pre_var(feature);
    return v.size() == 1 ? v + "1" : v + "_1";
}

namespace {

Term var(const std::string& n) { return Term::var(n); }
Term sym(const std::string& n) { return Term::sym(n); }
Term num(std::int64_t v) { return Term::integer(v); }

Literal pos(std::string pred, std::vector<Term> args) { return PosLit{Atom{std::move(pred), std::move(args), false}}; }
Literal naf(std::string pred, std::vector<Term> args) { return NafLit{Atom{std::move(pred), std::move(args), false}}; }
Literal cmp(CmpOp op, Term l, Term r) { return CmpLit{op, std::move(l), std::move(r)}; }

Term scalar_term(const Scalar& v) {
    if (const auto* s = std::get_if<std::string>(&v)) return sym(*s);
    return num(std::get<std::int64_t>(v));
}

class Compiler {
public:
    explicit Compiler(const ProblemSpec& spec) : spec_(spec) {
        for (std::size_t i = 0; i < spec.features.size(); ++i) {
            out_.pre_vars.push_back(pre_var(i));
            out_.post_vars.push_back(post_var(i));
            out_.code_vars.push_back("Z" + std::to_string(i + 1));
        }
        out_.target = spec.decision.target;
        std::set<std::size_t> used;
        auto scan = [&](const std::vector<std::vector<Condition>>& clauses) {
            for (const auto& cl : clauses)
                for (const auto& c : cl)
                    if (!c.auxiliary) used.insert(*spec.index_of(c.subject));
        };
        scan(spec.decision.clauses);
        for (const auto& a : spec.decision.auxiliary) scan(a.clauses);
        out_.decision_features.assign(used.begin(), used.end());
    }

    CompiledSpec run() {
        domains();
        properties();
        causal();
        realistic("pre");
        realistic("post");
        decision();
        wrapper();
        rules_.push_back(counterfactual_rule());
        restrictions();
        measure();
        refined();
        out_.program = asp::Program(rules_);
        signatures();
        return std::move(out_);
    }

    Rule counterfactual_rule() const {
        const auto d = decision_args(out_.post_vars);
        Rule r{Atom{"cf_" + spec_.decision.target, d, false}, {}};
        for (auto i : out_.decision_features) r.body.push_back(pos("f_domain", {sym(spec_.features[i].name), var(out_.post_vars[i])}));
        for (auto i : out_.decision_features) r.body.push_back(pos("post_" + spec_.features[i].name, {var(out_.post_vars[i])}));
        r.body.push_back(naf(lite(), d));
        return r;
    }

private:
    std::string lite() const { return "lite_" + spec_.decision.target; }

    std::vector<Term> decision_args(const std::vector<std::string>& names) const {
        std::vector<Term> out;
        for (auto i : out_.decision_features) out.push_back(var(names[i]));
        return out;
    }

    std::vector<Term> all_args(const std::vector<std::string>& names) const {
        std::vector<Term> out;
        for (const auto& n : names) out.push_back(var(n));
        return out;
    }

    void domains() {
        for (const auto& f : spec_.features) {
            if (f.numeric()) {
                rules_.push_back(Rule{Atom{"f_domain", {sym(f.name), var("X")}, false},
                                      {cmp(CmpOp::Ge, var("X"), num(f.range().lo)),
                                       cmp(CmpOp::Le, var("X"), num(f.range().hi))}});
            } else {
                for (const auto& v : f.categorical().values)
                    rules_.push_back(Rule{Atom{"f_domain", {sym(f.name), sym(v)}, false}, {}});
            }
        }
    }

    // Each world picks exactly one value per feature because every realistic
    // tuple binds one variable per feature; the property predicates restrict
    // that variable to the declared domain.
    void properties() {
        for (const auto& f : spec_.features)
            for (const char* world : {"pre", "post"})
                rules_.push_back(Rule{Atom{std::string(world) + "_" + f.name, {var("X")}, false},
                                      {pos("f_domain", {sym(f.name), var("X")})}});
    }

    Literal condition(const Condition& c, const std::vector<std::string>& names) const {
        if (c.auxiliary) {
            auto args = decision_args(names);
            return c.negated ? naf(c.subject, std::move(args)) : pos(c.subject, std::move(args));
        }
        const auto i = *spec_.index_of(c.subject);
        const auto v = var(names[i]);
        const auto k = scalar_term(c.value);
        const bool numeric = spec_.features[i].numeric();
        switch (c.op) {
        case Op::Eq: return cmp(numeric ? CmpOp::ArithEq : CmpOp::Eq, v, k);
        case Op::Neq: return cmp(numeric ? CmpOp::ArithNeq : CmpOp::Neq, v, k);
        case Op::Le: return cmp(CmpOp::Le, v, k);
        case Op::Ge: return cmp(CmpOp::Ge, v, k);
        case Op::Lt: return cmp(CmpOp::Lt, v, k);
        case Op::Gt: return cmp(CmpOp::Gt, v, k);
        }
        return cmp(CmpOp::Eq, v, k);
    }

    struct CausalGroup {
        std::size_t guard;
        std::vector<std::size_t> constrained;
        std::string pred;
        // guard value -> merged constraints, in first-appearance order
        std::vector<std::pair<std::string, std::vector<Condition>>> clauses;
    };

    void causal() {
        std::vector<CausalGroup> groups;
        for (const auto& r : spec_.causal_rules) {
            const auto g = *spec_.index_of(r.guard_feature);
            auto it = std::find_if(groups.begin(), groups.end(), [&](const auto& x) { return x.guard == g; });
            if (it == groups.end()) {
                groups.push_back(CausalGroup{g, {}, {}, {}});
                it = groups.end() - 1;
            }
            for (const auto& c : r.constraints) {
                const auto f = *spec_.index_of(c.subject);
                if (std::find(it->constrained.begin(), it->constrained.end(), f) == it->constrained.end())
                    it->constrained.push_back(f);
            }
            auto cl = std::find_if(it->clauses.begin(), it->clauses.end(),
                                   [&](const auto& x) { return x.first == r.guard_value; });
            if (cl == it->clauses.end()) {
                it->clauses.emplace_back(r.guard_value, std::vector<Condition>{});
                cl = it->clauses.end() - 1;
            }
            cl->second.insert(cl->second.end(), r.constraints.begin(), r.constraints.end());
        }
        for (auto& g : groups) {
            std::sort(g.constrained.begin(), g.constrained.end());
            g.pred = "causal_" + spec_.features[g.guard].name;
            for (auto f : g.constrained) g.pred += "_" + spec_.features[f].name;
            const auto& names = out_.pre_vars;
            auto head_args = [&](const Term& guard) {
                std::vector<Term> args{guard};
                for (auto f : g.constrained) args.push_back(var(names[f]));
                return args;
            };
            for (const auto& [value, conds] : g.clauses) {
                Rule r{Atom{g.pred, head_args(sym(value)), false}, {}};
                for (const auto& c : conds) r.body.push_back(condition(c, names));
                rules_.push_back(std::move(r));
            }
            // Guard values without a rule are unconstrained.
            const auto& values = spec_.features[g.guard].categorical().values;
            const bool uncovered = std::any_of(values.begin(), values.end(), [&](const auto& v) {
                return std::none_of(g.clauses.begin(), g.clauses.end(), [&](const auto& c) { return c.first == v; });
            });
            if (uncovered) {
                Rule fallback{Atom{g.pred, head_args(var(names[g.guard])), false}, {}};
                for (const auto& c : g.clauses) fallback.body.push_back(cmp(CmpOp::Neq, var(names[g.guard]), sym(c.first)));
                rules_.push_back(std::move(fallback));
            }
            causal_.push_back(std::move(g));
        }
    }

    void realistic(const std::string& world) {
        const auto& names = world == "pre" ? out_.pre_vars : out_.post_vars;
        Rule r{Atom{world + "_realistic", all_args(names), false}, {}};
        for (std::size_t i = 0; i < spec_.features.size(); ++i)
            r.body.push_back(pos("f_domain", {sym(spec_.features[i].name), var(names[i])}));
        for (std::size_t i = 0; i < spec_.features.size(); ++i)
            r.body.push_back(pos(world + "_" + spec_.features[i].name, {var(names[i])}));
        for (const auto& g : causal_) {
            std::vector<Term> args{var(names[g.guard])};
            for (auto f : g.constrained) args.push_back(var(names[f]));
            r.body.push_back(pos(g.pred, std::move(args)));
        }
        rules_.push_back(std::move(r));
    }

    void decision() {
        const auto& names = out_.pre_vars;
        for (const auto& cl : spec_.decision.clauses) {
            Rule r{Atom{lite(), decision_args(names), false}, {}};
            for (const auto& c : cl) r.body.push_back(condition(c, names));
            rules_.push_back(std::move(r));
        }
        for (const auto& a : spec_.decision.auxiliary)
            for (const auto& cl : a.clauses) {
                Rule r{Atom{a.name, decision_args(names), false}, {}};
                for (const auto& c : cl) r.body.push_back(condition(c, names));
                rules_.push_back(std::move(r));
            }
    }

    void wrapper() {
        const auto d = decision_args(out_.pre_vars);
        Rule r{Atom{spec_.decision.target, d, false}, {}};
        for (auto i : out_.decision_features) r.body.push_back(pos("f_domain", {sym(spec_.features[i].name), var(out_.pre_vars[i])}));
        for (auto i : out_.decision_features) r.body.push_back(pos("pre_" + spec_.features[i].name, {var(out_.pre_vars[i])}));
        r.body.push_back(pos(lite(), d));
        rules_.push_back(std::move(r));
    }

    void restrictions() {
        for (int z : {0, 1}) rules_.push_back(Rule{Atom{"f_domain", {sym("restrict_C"), num(z)}, false}, {}});
        for (int z : {0, 1, -1}) rules_.push_back(Rule{Atom{"f_domain", {sym("restrict_N"), num(z)}, false}, {}});
        const auto pre = var("Pre_X"), post = var("Post_X"), z = var("Z");
        auto compare = [&](const std::string& kind, std::int64_t code, CmpOp op) {
            rules_.push_back(Rule{Atom{"compare_" + kind, {pre, post, z}, false},
                                  {pos("f_domain", {sym("restrict_" + kind), z}), cmp(CmpOp::Eq, z, num(code)),
                                   cmp(op, pre, post)}});
        };
        compare("C", 0, CmpOp::Eq);
        compare("C", 1, CmpOp::Neq);
        compare("N", 0, CmpOp::Eq);
        compare("N", 1, CmpOp::Lt);
        compare("N", -1, CmpOp::Gt);

        Rule r{Atom{"id_restrict", wrapped_args(), false}, {}};
        for (std::size_t i = 0; i < spec_.features.size(); ++i)
            r.body.push_back(pos(spec_.features[i].numeric() ? "compare_N" : "compare_C",
                                 {var(out_.pre_vars[i]), var(out_.post_vars[i]), var(out_.code_vars[i])}));
        rules_.push_back(std::move(r));
    }

    std::vector<Term> wrapped_args() const {
        return {Term::compound("original", all_args(out_.pre_vars)), Term::compound("id", all_args(out_.code_vars)),
                Term::compound("counterfactual", all_args(out_.post_vars))};
    }

    void measure() {
        auto args = all_args(out_.code_vars);
        args.push_back(var("X"));
        Rule r{Atom{"measure", args, false}, {}};
        for (std::size_t i = 0; i < spec_.features.size(); ++i)
            r.body.push_back(pos("f_domain", {sym(spec_.features[i].numeric() ? "restrict_N" : "restrict_C"),
                                              var(out_.code_vars[i])}));
        // Categorical codes are summed as is, numeric codes squared.
        std::vector<Term> terms;
        for (std::size_t i = 0; i < spec_.features.size(); ++i) {
            if (!spec_.features[i].numeric()) {
                terms.push_back(var(out_.code_vars[i]));
                continue;
            }
            const auto q = var("Q" + std::to_string(i + 1));
            r.body.push_back(cmp(CmpOp::ArithEq, q,
                                 Term::compound("*", {var(out_.code_vars[i]), var(out_.code_vars[i])})));
            terms.push_back(q);
        }
        Term sum = terms.front();
        for (std::size_t i = 1; i < terms.size(); ++i) sum = Term::compound("+", {sum, terms[i]});
        r.body.push_back(cmp(CmpOp::ArithEq, var("X"), sum));
        rules_.push_back(std::move(r));
    }

    void refined() {
        auto head = wrapped_args();
        head.push_back(var("X"));
        Rule r{Atom{"refined", head, false}, {}};
        r.body.push_back(pos(spec_.decision.target, decision_args(out_.pre_vars)));
        r.body.push_back(pos("pre_realistic", all_args(out_.pre_vars)));
        r.body.push_back(pos("cf_" + spec_.decision.target, decision_args(out_.post_vars)));
        r.body.push_back(pos("post_realistic", all_args(out_.post_vars)));
        r.body.push_back(pos("id_restrict", wrapped_args()));
        auto m = all_args(out_.code_vars);
        m.push_back(var("X"));
        r.body.push_back(pos("measure", m));
        rules_.push_back(std::move(r));
    }

    void signatures() {
        using K = ArgSort::Kind;
        auto feature = [](std::size_t i) {
            ArgSort s;
            s.kind = K::Feature;
            s.feature = i;
            return s;
        };
        auto simple = [](K k) {
            ArgSort s;
            s.kind = k;
            return s;
        };
        auto features = [&](const std::vector<std::size_t>& idx) {
            std::vector<ArgSort> out;
            for (auto i : idx) out.push_back(feature(i));
            return out;
        };
        std::vector<std::size_t> all(spec_.features.size());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
        std::vector<ArgSort> codes;
        for (const auto& f : spec_.features) codes.push_back(simple(f.numeric() ? K::NumericCode : K::CategoricalCode));
        auto wrap = [&](const std::string& functor, std::vector<ArgSort> items) {
            ArgSort s;
            s.kind = K::Wrapped;
            s.functor = functor;
            s.items = std::move(items);
            return s;
        };
        auto& sig = out_.signatures;
        sig.push_back({{"f_domain", 2}, {simple(K::FeatureName), simple(K::DomainValue)}});
        for (std::size_t i = 0; i < spec_.features.size(); ++i)
            for (const char* world : {"pre_", "post_"})
                sig.push_back({{world + spec_.features[i].name, 1}, {feature(i)}});
        for (const auto& g : causal_) {
            std::vector<std::size_t> idx{g.guard};
            idx.insert(idx.end(), g.constrained.begin(), g.constrained.end());
            sig.push_back({{g.pred, idx.size()}, features(idx)});
        }
        sig.push_back({{"pre_realistic", all.size()}, features(all)});
        sig.push_back({{"post_realistic", all.size()}, features(all)});
        const auto& d = out_.decision_features;
        sig.push_back({{lite(), d.size()}, features(d)});
        for (const auto& a : spec_.decision.auxiliary) sig.push_back({{a.name, d.size()}, features(d)});
        sig.push_back({{spec_.decision.target, d.size()}, features(d)});
        sig.push_back({{"cf_" + spec_.decision.target, d.size()}, features(d)});
        sig.push_back({{"compare_C", 3}, {simple(K::AnyCategorical), simple(K::AnyCategorical), simple(K::CategoricalCode)}});
        sig.push_back({{"compare_N", 3}, {simple(K::AnyNumeric), simple(K::AnyNumeric), simple(K::NumericCode)}});
        const auto tuple = std::vector<ArgSort>{wrap("original", features(all)), wrap("id", codes),
                                                wrap("counterfactual", features(all))};
        sig.push_back({{"id_restrict", 3}, tuple});
        auto m = codes;
        m.push_back(simple(K::Cost));
        sig.push_back({{"measure", codes.size() + 1}, m});
        auto rf = tuple;
        rf.push_back(simple(K::Cost));
        sig.push_back({{"refined", 4}, rf});
    }

    const ProblemSpec& spec_;
    CompiledSpec out_;
    std::vector<Rule> rules_;
    std::vector<CausalGroup> causal_;
};

}  // namespace

CompiledSpec compile_spec(const ProblemSpec& spec) {
    spec.validate();
    return Compiler(spec).run();
}

asp::Program compile(const ProblemSpec& spec) { return compile_spec(spec).program; }

asp::Rule build_counterfactual_rule(const ProblemSpec& spec) {
    spec.validate();
    return Compiler(spec).counterfactual_rule();
}

}  // namespace cfgs
