#include "cfgs/service/api.hpp"

#include "cfgs/errors.hpp"

#include <algorithm>
#include <sstream>

namespace cfgs::service {

namespace {

std::string scalar_text(const json& v, const std::string& field) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
    throw RequestError(field, "expected a string or an integer");
}

std::optional<std::int64_t> as_int(const Value* v) {
    if (!v) return std::nullopt;
    if (const auto* x = std::get_if<std::int64_t>(v)) return *x;
    return std::nullopt;
}

std::string bound(std::int64_t v) {
    if (v == solver::NumericSet::kMin) return "-inf";
    if (v == solver::NumericSet::kMax) return "inf";
    return std::to_string(v);
}

std::int64_t witness(const solver::NumericSet& s, const Value* near) {
    if (auto n = as_int(near)) return s.nearest(*n);
    return s.min() == solver::NumericSet::kMin ? s.nearest(0) : s.min();
}

const char* world_name(World w) { return w == World::Pre ? "pre" : "post"; }

}  // namespace

ExplainRequest make_explain_request(const ProblemSpec& spec,
                                    const std::vector<std::pair<std::string, std::string>>& instance,
                                    const std::vector<std::pair<std::string, std::string>>& restrictions) {
    for (const auto& [k, v] : instance)
        if (!spec.index_of(k)) throw RequestError("instance." + k, "unknown feature");
    for (const auto& [k, v] : restrictions)
        if (!spec.index_of(k)) throw RequestError("restrictions." + k, "unknown feature");
    for (const auto& f : spec.features)
        if (std::none_of(instance.begin(), instance.end(), [&](const auto& kv) { return kv.first == f.name; }))
            throw RequestError("instance." + f.name, "missing");
    ExplainRequest req;
    try {
        req.instance = make_instance(spec, instance);
    } catch (const DomainError& e) {
        throw RequestError("instance", e.what());
    }
    for (const auto& [k, v] : restrictions) {
        try {
            make_restrictions(spec, {{k, v}});
        } catch (const IllegalCode& e) {
            throw RequestError("restrictions." + k, e.what());
        }
    }
    req.restrictions = make_restrictions(spec, restrictions);
    return req;
}

ExplainRequest parse_explain_request(const ProblemSpec& spec, const json& body) {
    if (!body.is_object()) throw RequestError("body", "expected a JSON object");
    for (const auto& [k, v] : body.items())
        if (k != "instance" && k != "restrictions" && k != "cost_bound" && k != "limit" && k != "minimal_only")
            throw RequestError(k, "unknown field");
    auto it = body.find("instance");
    if (it == body.end() || !it->is_object()) throw RequestError("instance", "expected an object of feature values");
    std::vector<std::pair<std::string, std::string>> inst, codes;
    for (const auto& [k, v] : it->items()) inst.emplace_back(k, scalar_text(v, "instance." + k));
    if (auto r = body.find("restrictions"); r != body.end()) {
        if (!r->is_object()) throw RequestError("restrictions", "expected an object of restriction codes");
        for (const auto& [k, v] : r->items()) codes.emplace_back(k, scalar_text(v, "restrictions." + k));
    }
    auto req = make_explain_request(spec, inst, codes);
    if (auto c = body.find("cost_bound"); c != body.end() && !c->is_null()) {
        if (!c->is_number_integer() || c->get<std::int64_t>() < 0)
            throw RequestError("cost_bound", "expected a non-negative integer");
        req.options.cost_bound = c->get<int>();
    }
    if (auto l = body.find("limit"); l != body.end() && !l->is_null()) {
        if (!l->is_number_integer() || l->get<std::int64_t>() < 1) throw RequestError("limit", "expected a positive integer");
        req.options.limit = l->get<std::size_t>();
    }
    if (auto m = body.find("minimal_only"); m != body.end()) {
        if (!m->is_boolean()) throw RequestError("minimal_only", "expected a boolean");
        req.options.minimal_only = m->get<bool>();
    }
    return req;
}

World parse_world(const std::string& s) {
    if (s == "pre") return World::Pre;
    if (s == "post") return World::Post;
    throw RequestError("world", "expected 'pre' or 'post'");
}

json value_json(const Value& v, const Value* near) {
    if (const auto* s = std::get_if<std::string>(&v)) return *s;
    if (const auto* i = std::get_if<std::int64_t>(&v)) return *i;
    if (const auto* set = std::get_if<solver::SymbolSet>(&v)) {
        json out = json::object();
        out["one_of"] = set->values();
        out["witness"] = set->empty() ? json(nullptr) : json(set->values().front());
        return out;
    }
    const auto& n = std::get<solver::NumericSet>(v);
    json out = json::object();
    json ivs = json::array();
    for (const auto& iv : n.intervals()) {
        json pair = json::array();
        pair.push_back(iv.lo == solver::NumericSet::kMin ? json(nullptr) : json(iv.lo));
        pair.push_back(iv.hi == solver::NumericSet::kMax ? json(nullptr) : json(iv.hi));
        ivs.push_back(std::move(pair));
    }
    out["intervals"] = std::move(ivs);
    out["witness"] = n.empty() ? json(nullptr) : json(witness(n, near));
    return out;
}

json instance_json(const ProblemSpec& spec, const Instance& instance, const Instance* near) {
    json out = json::object();
    for (std::size_t i = 0; i < spec.features.size(); ++i)
        out[spec.features[i].name] = value_json(instance.values.at(i), near ? &near->values.at(i) : nullptr);
    return out;
}

std::string describe_change(const FeatureSpec& feature, const Value& before, const Value& after) {
    std::string rhs;
    if (const auto* n = std::get_if<solver::NumericSet>(&after)) {
        const auto w = witness(*n, &before);
        const auto& r = feature.numeric() ? feature.range() : Numeric{solver::NumericSet::kMin, solver::NumericSet::kMax};
        if (n->intervals().size() == 1 && n->max() >= r.hi && n->min() > r.lo)
            rhs = "≥ " + bound(n->min());
        else if (n->intervals().size() == 1 && n->min() <= r.lo && n->max() < r.hi)
            rhs = "≤ " + bound(n->max());
        else
            rhs = "∈ " + n->str();
        rhs += " (e.g. " + std::to_string(w) + ")";
    } else if (const auto* s = std::get_if<solver::SymbolSet>(&after)) {
        rhs = s->size() == 1 ? s->values().front() : "one of " + s->str();
        if (s->size() > 1) rhs += " (e.g. " + s->values().front() + ")";
    } else {
        rhs = to_string(after);
    }
    return feature.name + ": " + to_string(before) + " → " + rhs;
}

json explain_json(const std::string& spec_id, const ProblemSpec& spec, const Instance& original,
                  const ExplainResult& result, std::optional<double> timing_ms) {
    json out = json::object();
    out["spec"] = spec_id;
    out["original"] = instance_json(spec, original);
    json pairs = json::array();
    for (std::size_t k = 0; k < result.pairs.size(); ++k) {
        const auto& p = result.pairs[k];
        json jp = json::object();
        jp["id"] = spec_id + "#" + std::to_string(k + 1);
        jp["cost"] = p.cost;
        json codes = json::object();
        for (std::size_t i = 0; i < spec.features.size(); ++i) codes[spec.features[i].name] = static_cast<int>(p.codes[i]);
        jp["codes"] = std::move(codes);
        jp["counterfactual"] = instance_json(spec, p.counterfactual, &p.original);
        json changes = json::array();
        for (std::size_t i = 0; i < spec.features.size(); ++i)
            if (p.codes[i] != Code::Zero)
                changes.push_back(describe_change(spec.features[i], p.original.values[i], p.counterfactual.values[i]));
        jp["changes"] = std::move(changes);
        pairs.push_back(std::move(jp));
    }
    out["count"] = result.pairs.size();
    out["pairs"] = std::move(pairs);
    if (result.infeasible) {
        out["infeasible"] = {{"message", *result.infeasible}, {"all_fixed", result.all_immutable}};
    } else {
        out["infeasible"] = nullptr;
    }
    if (timing_ms) out["timing_ms"] = *timing_ms;
    return out;
}

json enumerate_json(const std::string& spec_id, const ProblemSpec& spec, World world,
                    const std::vector<Instance>& instances, std::optional<double> timing_ms) {
    json out = json::object();
    out["spec"] = spec_id;
    out["world"] = world_name(world);
    out["count"] = instances.size();
    json list = json::array();
    for (const auto& i : instances) list.push_back(instance_json(spec, i));
    out["instances"] = std::move(list);
    if (timing_ms) out["timing_ms"] = *timing_ms;
    return out;
}

std::string explain_table(const ProblemSpec& spec, const Instance& original, const ExplainResult& result) {
    std::ostringstream out;
    out << "original " << original.str() << "\n";
    if (result.pairs.empty()) {
        out << "no counterfactual: " << result.infeasible.value_or("none found") << "\n";
        return out.str();
    }
    for (std::size_t k = 0; k < result.pairs.size(); ++k) {
        const auto& p = result.pairs[k];
        out << "#" << k + 1 << "  cost " << p.cost << "  " << p.counterfactual.str() << "\n";
        for (std::size_t i = 0; i < spec.features.size(); ++i)
            if (p.codes[i] != Code::Zero)
                out << "    " << describe_change(spec.features[i], p.original.values[i], p.counterfactual.values[i])
                    << "\n";
    }
    return out.str();
}

std::string enumerate_table(const ProblemSpec& spec, World world, const std::vector<Instance>& instances) {
    std::ostringstream out;
    out << world_name(world) << "-world instances (";
    for (std::size_t i = 0; i < spec.features.size(); ++i) out << (i ? ", " : "") << spec.features[i].name;
    out << "): " << instances.size() << "\n";
    for (const auto& i : instances) out << "  " << i.str() << "\n";
    return out.str();
}

std::string error_code(const std::exception& e) {
    if (dynamic_cast<const NotUndesired*>(&e)) return "NotUndesired";
    if (dynamic_cast<const InfeasibleRestrictions*>(&e)) return "InfeasibleRestrictions";
    if (dynamic_cast<const UnrealisticInstance*>(&e)) return "UnrealisticInstance";
    if (dynamic_cast<const RequestError*>(&e)) return "InvalidRequest";
    if (dynamic_cast<const SpecValidationError*>(&e)) return "SchemaError";
    if (dynamic_cast<const SyntaxError*>(&e)) return "SyntaxError";
    if (dynamic_cast<const DomainError*>(&e)) return "DomainError";
    if (dynamic_cast<const IllegalCode*>(&e)) return "IllegalCode";
    if (dynamic_cast<const StratificationError*>(&e)) return "StratificationError";
    if (dynamic_cast<const RangeRestrictionError*>(&e)) return "RangeRestrictionError";
    if (dynamic_cast<const FixtureCorrupt*>(&e)) return "FixtureCorrupt";
    if (dynamic_cast<const DepthLimitExceeded*>(&e)) return "DepthLimitExceeded";
    if (dynamic_cast<const nlohmann::json::exception*>(&e)) return "InvalidJson";
    return "InternalError";
}

int http_status(const std::exception& e) {
    const auto code = error_code(e);
    if (code == "NotUndesired" || code == "InfeasibleRestrictions" || code == "UnrealisticInstance") return 422;
    if (code == "InternalError" || code == "DepthLimitExceeded") return 500;
    return 400;
}

json error_json(const std::exception& e) {
    json err = json::object();
    err["code"] = error_code(e);
    err["message"] = e.what();
    if (const auto* r = dynamic_cast<const RequestError*>(&e)) err["field"] = r->field();
    if (const auto* s = dynamic_cast<const SpecValidationError*>(&e)) err["field"] = s->field();
    if (const auto* i = dynamic_cast<const InfeasibleRestrictions*>(&e)) err["all_fixed"] = i->all_fixed();
    return json{{"error", err}};
}

}  // namespace cfgs::service
