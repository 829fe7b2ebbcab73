#pragma once

#include "cfgs/asp/ast.hpp"

#include <string>

namespace cfgs::asp {

std::string to_string(const Term& term);
std::string to_string(const Atom& atom);
std::string to_string(const Literal& literal);
// Rule text including the terminating period, no newline.
std::string to_string(const Rule& rule);

// One rule per line. Inverse of parse_program up to whitespace and comments.
std::string serialize(const Program& program);
std::string serialize(const std::vector<Rule>& rules);

// Display name of a dual-space predicate: `not_p`, `not_p_2` for helpers.
std::string dual_display_name(const std::string& pred);

}  // namespace cfgs::asp
