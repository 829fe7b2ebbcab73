#include "cfgs/service/document.hpp"

#include "cfgs/asp/parser.hpp"
#include "cfgs/errors.hpp"

#include <openssl/evp.h>
#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <map>
#include <regex>
#include <sstream>

#ifndef CFGS_SOURCE_FIXTURES
#define CFGS_SOURCE_FIXTURES "fixtures"
#endif

namespace cfgs::service {

namespace {

const std::regex kInteger(R"(-?[0-9]+)");
const std::regex kDecimal(R"(-?[0-9]+\.[0-9]+)");

[[noreturn]] void fail(const std::string& field, const std::string& message) { throw SpecValidationError(field, message); }

void only_keys(const json& obj, const std::string& field, std::initializer_list<const char*> keys) {
    if (!obj.is_object()) fail(field, "expected a mapping");
    for (const auto& [k, v] : obj.items())
        if (std::none_of(keys.begin(), keys.end(), [&](const char* key) { return k == key; }))
            fail(field.empty() ? k : field + "." + k, "unknown key");
}

const json& need(const json& obj, const std::string& field, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end()) fail(field.empty() ? key : field + "." + key, "missing");
    return *it;
}

std::string text(const json& v, const std::string& field) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
    fail(field, "expected a string");
}

std::int64_t integer(const json& v, const std::string& field) {
    if (!v.is_number_integer()) fail(field, "expected an integer");
    return v.get<std::int64_t>();
}

const json& array(const json& v, const std::string& field) {
    if (!v.is_array()) fail(field, "expected a list");
    return v;
}

Mutability parse_mutability(const std::string& s, const std::string& field) {
    if (s == "free") return Mutability::Free;
    if (s == "immutable") return Mutability::Immutable;
    if (s == "increase_only") return Mutability::IncreaseOnly;
    if (s == "decrease_only") return Mutability::DecreaseOnly;
    fail(field, "unknown mutability '" + s + "' (free, immutable, increase_only, decrease_only)");
}

const char* mutability_name(Mutability m) {
    switch (m) {
    case Mutability::Free: return "free";
    case Mutability::Immutable: return "immutable";
    case Mutability::IncreaseOnly: return "increase_only";
    case Mutability::DecreaseOnly: return "decrease_only";
    }
    return "free";
}

Op parse_op(const std::string& s) {
    if (s == "=") return Op::Eq;
    if (s == "!=") return Op::Neq;
    if (s == "<=") return Op::Le;
    if (s == ">=") return Op::Ge;
    if (s == "<") return Op::Lt;
    return Op::Gt;
}

asp::CmpOp cmp_of(Op op) {
    switch (op) {
    case Op::Eq: return asp::CmpOp::ArithEq;
    case Op::Neq: return asp::CmpOp::ArithNeq;
    case Op::Le: return asp::CmpOp::Le;
    case Op::Ge: return asp::CmpOp::Ge;
    case Op::Lt: return asp::CmpOp::Lt;
    case Op::Gt: return asp::CmpOp::Gt;
    }
    return asp::CmpOp::ArithEq;
}

Op op_of(asp::CmpOp op) {
    switch (op) {
    case asp::CmpOp::Le: return Op::Le;
    case asp::CmpOp::Ge: return Op::Ge;
    case asp::CmpOp::Lt: return Op::Lt;
    case asp::CmpOp::Gt: return Op::Gt;
    case asp::CmpOp::ArithNeq:
    case asp::CmpOp::Neq: return Op::Neq;
    default: return Op::Eq;
    }
}

std::string unquote(const std::string& s) {
    if (s.size() >= 2 && (s.front() == '\'' || s.front() == '"') && s.back() == s.front()) return s.substr(1, s.size() - 2);
    return s;
}

std::vector<Condition> conjunction(const ProblemSpec& spec, const json& v, const std::string& field) {
    std::vector<Condition> out;
    const auto& list = array(v, field);
    for (std::size_t i = 0; i < list.size(); ++i) {
        const auto f = field + "[" + std::to_string(i) + "]";
        out.push_back(parse_condition(spec, text(list[i], f), f));
    }
    return out;
}

json yaml_to_json(const YAML::Node& node) {
    switch (node.Type()) {
    case YAML::NodeType::Map: {
        json obj = json::object();
        for (const auto& kv : node) obj[kv.first.as<std::string>()] = yaml_to_json(kv.second);
        return obj;
    }
    case YAML::NodeType::Sequence: {
        json arr = json::array();
        for (const auto& item : node) arr.push_back(yaml_to_json(item));
        return arr;
    }
    case YAML::NodeType::Scalar: {
        const auto s = node.Scalar();
        if (node.Tag() != "!" && std::regex_match(s, kInteger)) {
            try {
                return std::stoll(s);
            } catch (const std::out_of_range&) {
                return s;
            }
        }
        return s;
    }
    default: return nullptr;
    }
}

void emit(YAML::Emitter& out, const json& v, bool flow) {
    if (v.is_object()) {
        out << YAML::BeginMap;
        for (const auto& [k, item] : v.items()) {
            out << YAML::Key << k << YAML::Value;
            const bool inline_list = k == "values" || k == "range" || k == "then";
            emit(out, item, flow || inline_list || k == "metadata");
        }
        out << YAML::EndMap;
    } else if (v.is_array()) {
        const bool scalars = std::all_of(v.begin(), v.end(), [](const json& x) { return x.is_primitive(); });
        if (flow || (scalars && !v.empty())) out << YAML::Flow;
        out << YAML::BeginSeq;
        for (const auto& item : v) emit(out, item, flow);
        out << YAML::EndSeq;
    } else if (v.is_number_integer()) {
        out << v.get<std::int64_t>();
    } else if (v.is_string()) {
        const auto s = v.get<std::string>();
        // Keep strings that look like integers from turning into numbers.
        if (std::regex_match(s, kInteger)) out << YAML::DoubleQuoted;
        out << s;
    } else {
        out << YAML::Null;
    }
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::map<std::string, std::string> read_checksums(const std::filesystem::path& file) {
    std::map<std::string, std::string> out;
    std::istringstream in(read_file(file));
    std::string line;
    static const std::regex row(R"(([0-9a-f]{64}) [ *](\S+))");
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::smatch m;
        if (!std::regex_match(line, m, row)) throw FixtureCorrupt("malformed line in " + file.string() + ": " + line);
        out[m[2]] = m[1];
    }
    return out;
}

}  // namespace

Condition parse_condition(const ProblemSpec& spec, std::string_view raw, const std::string& field) {
    static const std::regex shape(R"(\s*(not\s+)?([A-Za-z_][A-Za-z0-9_]*)\s*(?:(!=|<=|>=|=|<|>)\s*(\S+))?\s*)");
    std::cmatch m;
    if (!std::regex_match(raw.begin(), raw.end(), m, shape))
        fail(field, "cannot read condition '" + std::string(raw) + "'");
    const std::string subject = m[2];
    if (!m[3].matched) return Condition::aux(subject, m[1].matched);
    if (m[1].matched) fail(field, "'not' only applies to auxiliary predicates");
    const auto idx = spec.index_of(subject);
    if (!idx) fail(field, "unknown feature '" + subject + "'");
    const Op op = parse_op(m[3]);
    const std::string value = unquote(m[4]);
    if (!spec.features[*idx].numeric()) return Condition::compare(subject, op, value);
    if (std::regex_match(value, kInteger)) return Condition::compare(subject, op, std::stoll(value));
    if (!std::regex_match(value, kDecimal)) fail(field, "numeric feature '" + subject + "' compared with '" + value + "'");
    try {
        const auto [cmp, bound] = asp::normalize_threshold(cmp_of(op), value);
        return Condition::compare(subject, op_of(cmp), bound);
    } catch (const SyntaxError& e) {
        fail(field, e.message());
    }
}

ProblemSpec spec_from_json(const json& doc) {
    only_keys(doc, "", {"schema", "metadata", "features", "causal_rules", "decision"});
    const auto& schema = need(doc, "", "schema");
    if (!schema.is_string() || schema.get<std::string>() != kSchemaVersion)
        fail("schema", std::string("expected '") + kSchemaVersion + "'");

    ProblemSpec spec;
    if (auto it = doc.find("metadata"); it != doc.end()) {
        only_keys(*it, "metadata", {"dataset", "variant", "undesired_label", "description"});
        auto get = [&](const char* key, std::string& out) {
            if (auto f = it->find(key); f != it->end()) out = text(*f, std::string("metadata.") + key);
        };
        get("dataset", spec.metadata.dataset);
        get("variant", spec.metadata.variant);
        get("undesired_label", spec.metadata.undesired_label);
        get("description", spec.metadata.description);
    }

    const auto& features = array(need(doc, "", "features"), "features");
    for (std::size_t i = 0; i < features.size(); ++i) {
        const auto field = "features[" + std::to_string(i) + "]";
        const auto& f = features[i];
        only_keys(f, field, {"name", "type", "values", "range", "mutability"});
        FeatureSpec fs;
        fs.name = text(need(f, field, "name"), field + ".name");
        const auto type = text(need(f, field, "type"), field + ".type");
        if (type == "categorical") {
            if (f.contains("range")) fail(field + ".range", "categorical features take 'values'");
            Categorical c;
            const auto& vals = array(need(f, field, "values"), field + ".values");
            for (std::size_t j = 0; j < vals.size(); ++j)
                c.values.push_back(text(vals[j], field + ".values[" + std::to_string(j) + "]"));
            fs.kind = std::move(c);
        } else if (type == "numeric") {
            if (f.contains("values")) fail(field + ".values", "numeric features take 'range'");
            const auto& r = array(need(f, field, "range"), field + ".range");
            if (r.size() != 2) fail(field + ".range", "expected [lo, hi]");
            fs.kind = Numeric{integer(r[0], field + ".range[0]"), integer(r[1], field + ".range[1]")};
        } else {
            fail(field + ".type", "expected 'categorical' or 'numeric'");
        }
        if (auto m = f.find("mutability"); m != f.end())
            fs.mutability = parse_mutability(text(*m, field + ".mutability"), field + ".mutability");
        spec.features.push_back(std::move(fs));
    }

    if (auto it = doc.find("causal_rules"); it != doc.end()) {
        const auto& rules = array(*it, "causal_rules");
        for (std::size_t i = 0; i < rules.size(); ++i) {
            const auto field = "causal_rules[" + std::to_string(i) + "]";
            only_keys(rules[i], field, {"if", "then"});
            const auto guard = parse_condition(spec, text(need(rules[i], field, "if"), field + ".if"), field + ".if");
            if (guard.auxiliary || guard.op != Op::Eq || !std::holds_alternative<std::string>(guard.value))
                fail(field + ".if", "guard must be 'feature = value' on a categorical feature");
            spec.causal_rules.push_back(
                {guard.subject, std::get<std::string>(guard.value), conjunction(spec, need(rules[i], field, "then"), field + ".then")});
        }
    }

    const auto& d = need(doc, "", "decision");
    only_keys(d, "decision", {"target", "rules", "auxiliary"});
    spec.decision.target = text(need(d, "decision", "target"), "decision.target");
    if (auto it = d.find("auxiliary"); it != d.end()) {
        const auto& aux = array(*it, "decision.auxiliary");
        for (std::size_t i = 0; i < aux.size(); ++i) {
            const auto field = "decision.auxiliary[" + std::to_string(i) + "]";
            only_keys(aux[i], field, {"name", "rules"});
            spec.decision.auxiliary.push_back({text(need(aux[i], field, "name"), field + ".name"), {}});
        }
        for (std::size_t i = 0; i < aux.size(); ++i) {
            const auto field = "decision.auxiliary[" + std::to_string(i) + "].rules";
            const auto& rules = array(need(aux[i], field, "rules"), field);
            for (std::size_t j = 0; j < rules.size(); ++j)
                spec.decision.auxiliary[i].clauses.push_back(
                    conjunction(spec, rules[j], field + "[" + std::to_string(j) + "]"));
        }
    }
    const auto& rules = array(need(d, "decision", "rules"), "decision.rules");
    for (std::size_t i = 0; i < rules.size(); ++i)
        spec.decision.clauses.push_back(conjunction(spec, rules[i], "decision.rules[" + std::to_string(i) + "]"));

    spec.validate();
    return spec;
}

json spec_to_json(const ProblemSpec& spec) {
    json doc = json::object();
    doc["schema"] = kSchemaVersion;
    doc["metadata"] = {{"dataset", spec.metadata.dataset},
                       {"variant", spec.metadata.variant},
                       {"undesired_label", spec.metadata.undesired_label},
                       {"description", spec.metadata.description}};
    json features = json::array();
    for (const auto& f : spec.features) {
        json jf = json::object();
        jf["name"] = f.name;
        if (f.numeric()) {
            jf["type"] = "numeric";
            jf["range"] = {f.range().lo, f.range().hi};
        } else {
            jf["type"] = "categorical";
            jf["values"] = f.categorical().values;
        }
        jf["mutability"] = mutability_name(f.mutability);
        features.push_back(std::move(jf));
    }
    doc["features"] = std::move(features);
    auto conj = [](const std::vector<Condition>& cs) {
        json out = json::array();
        for (const auto& c : cs) out.push_back(c.str());
        return out;
    };
    json causal = json::array();
    for (const auto& r : spec.causal_rules) {
        json jr = json::object();
        jr["if"] = r.guard_feature + " = " + r.guard_value;
        jr["then"] = conj(r.constraints);
        causal.push_back(std::move(jr));
    }
    doc["causal_rules"] = std::move(causal);
    json decision = json::object();
    decision["target"] = spec.decision.target;
    decision["rules"] = json::array();
    for (const auto& c : spec.decision.clauses) decision["rules"].push_back(conj(c));
    decision["auxiliary"] = json::array();
    for (const auto& a : spec.decision.auxiliary) {
        json ja = json::object();
        ja["name"] = a.name;
        ja["rules"] = json::array();
        for (const auto& c : a.clauses) ja["rules"].push_back(conj(c));
        decision["auxiliary"].push_back(std::move(ja));
    }
    doc["decision"] = std::move(decision);
    return doc;
}

ProblemSpec parse_spec_yaml(std::string_view text) {
    YAML::Node root;
    try {
        root = YAML::Load(std::string(text));
    } catch (const YAML::ParserException& e) {
        throw SyntaxError(static_cast<std::size_t>(e.mark.line + 1), static_cast<std::size_t>(e.mark.column + 1), e.msg);
    }
    return spec_from_json(yaml_to_json(root));
}

std::string spec_to_yaml(const ProblemSpec& spec) {
    YAML::Emitter out;
    emit(out, spec_to_json(spec), false);
    return std::string(out.c_str()) + "\n";
}

SpecDocument load_spec_file(const std::filesystem::path& path) {
    SpecDocument doc;
    doc.id = path.stem().string();
    doc.path = path;
    doc.spec = parse_spec_yaml(read_file(path));
    return doc;
}

std::vector<SpecDocument> load_spec_dir(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) throw Error("'" + dir.string() + "' is not a directory");
    std::map<std::string, std::string> sums;
    const auto checksums = dir / "CHECKSUMS";
    const bool checked = std::filesystem::exists(checksums);
    if (checked) sums = read_checksums(checksums);
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".spec") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    std::vector<SpecDocument> out;
    for (const auto& f : files) {
        if (checked) {
            auto it = sums.find(f.filename().string());
            if (it == sums.end()) throw FixtureCorrupt(f.filename().string() + " is not listed in CHECKSUMS");
            if (sha256_hex(read_file(f)) != it->second) throw FixtureCorrupt(f.filename().string() + ": checksum mismatch");
        }
        out.push_back(load_spec_file(f));
    }
    return out;
}

std::filesystem::path default_fixture_dir() {
    if (const char* env = std::getenv("CFGS_FIXTURE_DIR"); env && *env) return env;
    return CFGS_SOURCE_FIXTURES;
}

std::vector<SpecDocument> load_fixtures(const std::filesystem::path& dir) {
    if (!std::filesystem::exists(dir / "CHECKSUMS")) throw FixtureCorrupt("missing " + (dir / "CHECKSUMS").string());
    auto docs = load_spec_dir(dir);
    const auto sums = read_checksums(dir / "CHECKSUMS");
    for (const auto& [name, sum] : sums)
        if (!std::filesystem::exists(dir / name)) throw FixtureCorrupt("CHECKSUMS lists missing file " + name);
    return docs;
}

std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) throw Error("sha256 failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 15];
    }
    return out;
}

}  // namespace cfgs::service
