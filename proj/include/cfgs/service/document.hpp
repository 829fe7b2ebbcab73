#pragma once

// Spec files: a YAML document (schema cfgs-spec/1) that maps one-to-one onto
// ProblemSpec. The JSON form served over HTTP has the same structure.
//
//   schema: cfgs-spec/1
//   metadata: {dataset: married, variant: example, undesired_label: married}
//   features:
//     - {name: relationship, type: categorical, values: [husband, wife, unmarried]}
//     - {name: age, type: numeric, range: [17, 90], mutability: increase_only}
//   causal_rules:
//     - {if: relationship = husband, then: [gender != female]}
//   decision:
//     target: married
//     rules:
//       - [relationship = husband]
//     auxiliary:
//       - {name: ab1, rules: [[budget_resolution = y]]}
//
// Conditions are `feature op value` with op one of = != <= >= < >, or a
// possibly negated auxiliary name (`not ab1`). Decimal thresholds on numeric
// features are rounded to the equivalent integer bound when read.

#include "cfgs/model.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace cfgs::service {

using json = nlohmann::ordered_json;

inline constexpr const char* kSchemaVersion = "cfgs-spec/1";

struct SpecDocument {
    std::string id;  // file stem
    std::filesystem::path path;
    ProblemSpec spec;
};

// Throws SpecValidationError naming the offending field.
ProblemSpec spec_from_json(const json& doc);
json spec_to_json(const ProblemSpec& spec);

// Throws SyntaxError for malformed YAML and SpecValidationError otherwise.
ProblemSpec parse_spec_yaml(std::string_view text);
std::string spec_to_yaml(const ProblemSpec& spec);

Condition parse_condition(const ProblemSpec& spec, std::string_view text, const std::string& field);

// Throws Error when the file cannot be read.
SpecDocument load_spec_file(const std::filesystem::path& path);

// Every *.spec file of a directory, sorted by id. When the directory has a
// CHECKSUMS file (sha256sum format) every spec must be listed and match.
std::vector<SpecDocument> load_spec_dir(const std::filesystem::path& dir);

// The bundled fixtures; CHECKSUMS is mandatory. Throws FixtureCorrupt. The
// directory defaults to $CFGS_FIXTURE_DIR, then the source tree's fixtures/.
std::filesystem::path default_fixture_dir();
std::vector<SpecDocument> load_fixtures(const std::filesystem::path& dir = default_fixture_dir());

std::string sha256_hex(std::string_view data);

}  // namespace cfgs::service
