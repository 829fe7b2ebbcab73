#include "cfgs/model.hpp"

#include "cfgs/errors.hpp"

#include <algorithm>
#include <charconv>
#include <regex>
#include <set>

namespace cfgs {

const char* spelling(Op op) {
    switch (op) {
    case Op::Eq: return "=";
    case Op::Neq: return "!=";
    case Op::Le: return "<=";
    case Op::Ge: return ">=";
    case Op::Lt: return "<";
    case Op::Gt: return ">";
    }
    return "?";
}

std::string to_string(const Scalar& v) {
    if (const auto* s = std::get_if<std::string>(&v)) return *s;
    return std::to_string(std::get<std::int64_t>(v));
}

std::string Condition::str() const {
    if (auxiliary) return (negated ? "not " : "") + subject;
    return subject + " " + spelling(op) + " " + to_string(value);
}

std::optional<std::size_t> ProblemSpec::index_of(const std::string& feature) const {
    for (std::size_t i = 0; i < features.size(); ++i)
        if (features[i].name == feature) return i;
    return std::nullopt;
}

const FeatureSpec& ProblemSpec::feature(const std::string& name) const {
    if (auto i = index_of(name)) return features[*i];
    throw SpecValidationError("features", "unknown feature '" + name + "'");
}

namespace {

bool identifier(const std::string& s) {
    static const std::regex re("[a-z][A-Za-z0-9_]*");
    return std::regex_match(s, re);
}

// Names the compiled program already uses for its own predicates.
bool reserved(const std::string& s) {
    static const std::set<std::string> names{"f_domain", "compare_C", "compare_N", "id_restrict", "measure",
                                             "refined", "pre_realistic", "post_realistic", "restrict_C",
                                             "restrict_N", "original", "id", "counterfactual", "not"};
    return names.count(s) != 0 || s.rfind("pre_", 0) == 0 || s.rfind("post_", 0) == 0 ||
           s.rfind("causal_", 0) == 0 || s.rfind("lite_", 0) == 0 || s.rfind("cf_", 0) == 0;
}

void check_condition(const ProblemSpec& spec, const Condition& c, const std::string& field, bool allow_aux) {
    if (c.auxiliary) {
        if (!allow_aux) throw SpecValidationError(field, "auxiliary predicates are not allowed here");
        const auto& aux = spec.decision.auxiliary;
        if (std::none_of(aux.begin(), aux.end(), [&](const auto& a) { return a.name == c.subject; }))
            throw SpecValidationError(field, "unknown auxiliary predicate '" + c.subject + "'");
        return;
    }
    const auto idx = spec.index_of(c.subject);
    if (!idx) throw SpecValidationError(field, "unknown feature '" + c.subject + "'");
    const auto& f = spec.features[*idx];
    if (f.numeric()) {
        if (!std::holds_alternative<std::int64_t>(c.value))
            throw SpecValidationError(field, "numeric feature '" + f.name + "' compared with a symbol");
        return;
    }
    if (c.op != Op::Eq && c.op != Op::Neq)
        throw SpecValidationError(field, "ordered comparison on categorical feature '" + f.name + "'");
    const auto value = to_string(c.value);
    const auto& vals = f.categorical().values;
    if (std::find(vals.begin(), vals.end(), value) == vals.end())
        throw SpecValidationError(field, "value '" + value + "' is not in the domain of '" + f.name + "'");
}

}  // namespace

void ProblemSpec::validate() const {
    if (features.empty()) throw SpecValidationError("features", "at least one feature is required");
    std::set<std::string> names;
    for (std::size_t i = 0; i < features.size(); ++i) {
        const auto& f = features[i];
        const auto field = "features[" + std::to_string(i) + "]";
        if (!identifier(f.name)) throw SpecValidationError(field + ".name", "'" + f.name + "' is not an identifier");
        if (reserved(f.name)) throw SpecValidationError(field + ".name", "'" + f.name + "' is a reserved name");
        if (!names.insert(f.name).second) throw SpecValidationError(field + ".name", "duplicate feature '" + f.name + "'");
        if (f.numeric()) {
            if (f.range().lo > f.range().hi) throw SpecValidationError(field + ".range", "lower bound exceeds upper bound");
        } else {
            const auto& vals = f.categorical().values;
            if (vals.empty()) throw SpecValidationError(field + ".values", "categorical domain is empty");
            std::set<std::string> seen;
            for (const auto& v : vals) {
                if (v.empty()) throw SpecValidationError(field + ".values", "empty value");
                if (!seen.insert(v).second) throw SpecValidationError(field + ".values", "duplicate value '" + v + "'");
            }
            if (f.mutability == Mutability::IncreaseOnly || f.mutability == Mutability::DecreaseOnly)
                throw SpecValidationError(field + ".mutability", "directional mutability needs a numeric feature");
        }
    }

    for (std::size_t i = 0; i < causal_rules.size(); ++i) {
        const auto& r = causal_rules[i];
        const auto field = "causal_rules[" + std::to_string(i) + "]";
        const auto idx = index_of(r.guard_feature);
        if (!idx) throw SpecValidationError(field + ".if", "unknown feature '" + r.guard_feature + "'");
        const auto& g = features[*idx];
        if (g.numeric()) throw SpecValidationError(field + ".if", "guard feature must be categorical");
        const auto& vals = g.categorical().values;
        if (std::find(vals.begin(), vals.end(), r.guard_value) == vals.end())
            throw SpecValidationError(field + ".if", "value '" + r.guard_value + "' is not in the domain of '" +
                                                         g.name + "'");
        if (r.constraints.empty()) throw SpecValidationError(field + ".then", "no constraints");
        for (std::size_t j = 0; j < r.constraints.size(); ++j) {
            const auto& c = r.constraints[j];
            const auto cf = field + ".then[" + std::to_string(j) + "]";
            check_condition(*this, c, cf, false);
            if (c.subject == r.guard_feature) throw SpecValidationError(cf, "a rule cannot constrain its own guard");
        }
    }

    const auto& d = decision;
    if (!identifier(d.target)) throw SpecValidationError("decision.target", "'" + d.target + "' is not an identifier");
    if (reserved(d.target) || names.count(d.target))
        throw SpecValidationError("decision.target", "'" + d.target + "' clashes with another name");
    std::set<std::string> aux_names;
    for (std::size_t i = 0; i < d.auxiliary.size(); ++i) {
        const auto& a = d.auxiliary[i];
        const auto field = "decision.auxiliary." + a.name;
        if (!identifier(a.name) || reserved(a.name) || names.count(a.name) || a.name == d.target)
            throw SpecValidationError(field, "'" + a.name + "' is not a usable predicate name");
        if (!aux_names.insert(a.name).second) throw SpecValidationError(field, "duplicate auxiliary predicate");
        for (std::size_t j = 0; j < a.clauses.size(); ++j)
            for (std::size_t k = 0; k < a.clauses[j].size(); ++k)
                check_condition(*this, a.clauses[j][k],
                                field + "[" + std::to_string(j) + "][" + std::to_string(k) + "]", true);
    }
    for (std::size_t i = 0; i < d.clauses.size(); ++i) {
        const auto field = "decision.rules[" + std::to_string(i) + "]";
        for (std::size_t k = 0; k < d.clauses[i].size(); ++k)
            check_condition(*this, d.clauses[i][k], field + "[" + std::to_string(k) + "]", true);
    }
}

bool is_ground(const Value& v) { return std::holds_alternative<std::string>(v) || std::holds_alternative<std::int64_t>(v); }

bool contains(const Value& set, const Scalar& v) {
    return std::visit(
        [&](const auto& s) -> bool {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, std::string>) {
                const auto* x = std::get_if<std::string>(&v);
                return x && *x == s;
            } else if constexpr (std::is_same_v<T, std::int64_t>) {
                const auto* x = std::get_if<std::int64_t>(&v);
                return x && *x == s;
            } else if constexpr (std::is_same_v<T, solver::SymbolSet>) {
                const auto* x = std::get_if<std::string>(&v);
                return x && s.contains(*x);
            } else {
                const auto* x = std::get_if<std::int64_t>(&v);
                return x && s.contains(*x);
            }
        },
        set);
}

std::string to_string(const Value& v) {
    return std::visit(
        [](const auto& s) -> std::string {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, std::string>) return s;
            else if constexpr (std::is_same_v<T, std::int64_t>) return std::to_string(s);
            else return s.str();
        },
        v);
}

bool Instance::ground() const { return std::all_of(values.begin(), values.end(), [](const auto& v) { return is_ground(v); }); }

std::string Instance::str() const {
    std::string out = "(";
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ", ";
        out += to_string(values[i]);
    }
    return out + ")";
}

namespace {

std::optional<std::int64_t> parse_int(const std::string& s) {
    std::int64_t v = 0;
    const auto* end = s.data() + s.size();
    auto [p, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || p != end) return std::nullopt;
    return v;
}

}  // namespace

Instance make_instance(const ProblemSpec& spec, const std::vector<std::pair<std::string, std::string>>& values) {
    Instance inst;
    inst.values.resize(spec.features.size());
    std::vector<bool> seen(spec.features.size(), false);
    for (const auto& [name, text] : values) {
        const auto idx = spec.index_of(name);
        if (!idx) throw DomainError("unknown feature '" + name + "'");
        if (seen[*idx]) throw DomainError("feature '" + name + "' given twice");
        seen[*idx] = true;
        if (spec.features[*idx].numeric()) {
            auto v = parse_int(text);
            if (!v) throw DomainError("feature '" + name + "' needs an integer, got '" + text + "'");
            inst.values[*idx] = *v;
        } else {
            inst.values[*idx] = text;
        }
    }
    for (std::size_t i = 0; i < seen.size(); ++i)
        if (!seen[i]) throw DomainError("missing value for feature '" + spec.features[i].name + "'");
    return inst;
}

std::string to_string(Code c) {
    switch (c) {
    case Code::MinusOne: return "-1";
    case Code::Zero: return "0";
    case Code::One: return "1";
    case Code::Free: return "free";
    }
    return "?";
}

Code parse_code(const std::string& s) {
    if (s == "0") return Code::Zero;
    if (s == "1") return Code::One;
    if (s == "-1") return Code::MinusOne;
    if (s == "free") return Code::Free;
    throw IllegalCode("'" + s + "' is not a restriction code (expected 0, 1, -1 or free)");
}

RestrictionVector make_restrictions(const ProblemSpec& spec,
                                    const std::vector<std::pair<std::string, std::string>>& codes) {
    auto r = RestrictionVector::defaults(spec);
    for (const auto& [name, text] : codes) {
        const auto idx = spec.index_of(name);
        if (!idx) throw DomainError("unknown feature '" + name + "'");
        const auto code = parse_code(text);
        if (code == Code::MinusOne && !spec.features[*idx].numeric())
            throw IllegalCode("code -1 is only defined for numeric features, not '" + name + "'");
        r.codes[*idx] = code;
    }
    return r;
}

}  // namespace cfgs
