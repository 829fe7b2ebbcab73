#pragma once

#include "cfgs/asp/ast.hpp"

#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

namespace cfgs::asp {

// Parses rule-language source into a validated Program.
//
//   program  := { rule }
//   rule     := atom [ ":-" literal { "," literal } ] "."
//   literal  := "not" atom | expr cmpop expr | atom
//   cmpop    := "=" | "\=" | "#>=" | "#=<" | "#>" | "#<" | "#=" | "#\="
//   expr     := product { ("+" | "-") product }
//   product  := primary { "*" primary }
//   primary  := VAR | INT | "-" INT | DECIMAL | SYMBOL | QUOTED
//             | SYMBOL "(" expr { "," expr } ")" | "(" expr ")"
//
// `%` starts a comment running to the end of the line. Decimal thresholds are
// only accepted on one side of an ordered comparison and are normalized to
// integer bounds (see normalize_threshold).
//
// Throws SyntaxError, RangeRestrictionError or StratificationError.
Program parse_program(std::string_view text);

// Parses without the range-restriction and stratification checks.
std::vector<Rule> parse_rules(std::string_view text);

// Parses a comma-separated query body, e.g. "married(A), pre_realistic(A,B,C)".
std::vector<Literal> parse_query(std::string_view text);

// Rounds a fractional bound of `x op value` to the equivalent integer bound:
// x =< 23.25 becomes x =< 23 and x > 23.25 becomes x >= 24. Integral values
// pass through unchanged. Throws SyntaxError for fractional (dis)equality.
std::pair<CmpOp, std::int64_t> normalize_threshold(CmpOp op, std::string_view decimal);

}  // namespace cfgs::asp
