#pragma once

// Request parsing and response rendering shared by the CLI and the HTTP
// service, so both produce the same pairs for the same input.

#include "cfgs/engine.hpp"
#include "cfgs/errors.hpp"
#include "cfgs/service/document.hpp"

#include <exception>
#include <optional>
#include <string>
#include <vector>

namespace cfgs::service {

struct ExplainRequest {
    Instance instance;
    RestrictionVector restrictions;
    ExplainOptions options;
};

// {"instance": {feature: value}, "restrictions": {feature: 0|1|-1|"free"},
//  "cost_bound": n, "limit": n, "minimal_only": bool}. Throws RequestError.
ExplainRequest parse_explain_request(const ProblemSpec& spec, const json& body);

// Builds a request from CLI-style name=value lists. Throws RequestError.
ExplainRequest make_explain_request(const ProblemSpec& spec,
                                    const std::vector<std::pair<std::string, std::string>>& instance,
                                    const std::vector<std::pair<std::string, std::string>>& restrictions);

enum class World : std::uint8_t { Pre, Post };
World parse_world(const std::string& s);  // "pre" | "post", throws RequestError

// A feature value as JSON: the scalar itself, or for sets
// {"intervals": [[lo, hi], ...], "witness": w} and {"one_of": [...], "witness": w}.
// The witness is the member closest to `near` when given.
json value_json(const Value& v, const Value* near = nullptr);
json instance_json(const ProblemSpec& spec, const Instance& instance, const Instance* near = nullptr);

// "capital_gain: 777 → ≥ 6850 (e.g. 6850)", "relationship: husband → unmarried".
std::string describe_change(const FeatureSpec& feature, const Value& before, const Value& after);

// Timing is omitted when absent so that CLI output is byte-stable.
json explain_json(const std::string& spec_id, const ProblemSpec& spec, const Instance& original,
                  const ExplainResult& result, std::optional<double> timing_ms = std::nullopt);
json enumerate_json(const std::string& spec_id, const ProblemSpec& spec, World world,
                    const std::vector<Instance>& instances, std::optional<double> timing_ms = std::nullopt);

std::string explain_table(const ProblemSpec& spec, const Instance& original, const ExplainResult& result);
std::string enumerate_table(const ProblemSpec& spec, World world, const std::vector<Instance>& instances);

// Stable machine-readable error code for an exception: "NotUndesired",
// "InfeasibleRestrictions", "SchemaError", ...
std::string error_code(const std::exception& e);
int http_status(const std::exception& e);
json error_json(const std::exception& e);

// Raised by the CLI and HTTP layers when explain finds no pair.
class InfeasibleRestrictions : public Error {
public:
    InfeasibleRestrictions(const std::string& message, bool all_fixed) : Error(message), all_fixed_(all_fixed) {}
    bool all_fixed() const noexcept { return all_fixed_; }

private:
    bool all_fixed_;
};

}  // namespace cfgs::service
