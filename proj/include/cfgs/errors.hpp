#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cfgs {

// Base of every error raised by the engine. Callers that only need a
// diagnostic can catch this; the CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SyntaxError : public Error {
public:
    SyntaxError(std::size_t line, std::size_t col, const std::string& message)
        : Error(std::to_string(line) + ":" + std::to_string(col) + ": " + message),
          line_(line), col_(col), message_(message) {}
    std::size_t line() const noexcept { return line_; }
    std::size_t col() const noexcept { return col_; }
    const std::string& message() const noexcept { return message_; }

private:
    std::size_t line_;
    std::size_t col_;
    std::string message_;
};

class RangeRestrictionError : public Error {
public:
    RangeRestrictionError(std::string rule, std::string variable)
        : Error("rule '" + rule + "' is not range-restricted: variable " + variable +
                " is not bound by a preceding positive literal"),
          rule_(std::move(rule)), variable_(std::move(variable)) {}
    const std::string& rule() const noexcept { return rule_; }
    const std::string& variable() const noexcept { return variable_; }

private:
    std::string rule_;
    std::string variable_;
};

class StratificationError : public Error {
public:
    explicit StratificationError(std::string cycle)
        : Error("program is not stratified: negative cycle " + cycle), cycle_(std::move(cycle)) {}
    const std::string& cycle() const noexcept { return cycle_; }

private:
    std::string cycle_;
};

class UnboundedVariableError : public Error {
public:
    using Error::Error;
};

class UnknownPredicateError : public Error {
public:
    using Error::Error;
};

class DepthLimitExceeded : public Error {
public:
    using Error::Error;
};

class TypeMismatch : public Error {
public:
    using Error::Error;
};

// Raised when a constraint between two variables cannot be decided without
// enumerating an unbounded domain.
class InstantiationError : public Error {
public:
    using Error::Error;
};

class TraceUnavailable : public Error {
public:
    TraceUnavailable() : Error("answer was produced without tracing enabled") {}
};

class SpecValidationError : public Error {
public:
    SpecValidationError(std::string field, const std::string& message)
        : Error(field + ": " + message), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class UnrealisticInstance : public Error {
public:
    using Error::Error;
};

class NotUndesired : public Error {
public:
    using Error::Error;
};

class IllegalCode : public Error {
public:
    using Error::Error;
};

class UnresolvedCode : public Error {
public:
    using Error::Error;
};

class GridTooLarge : public Error {
public:
    using Error::Error;
};

class FixtureCorrupt : public Error {
public:
    using Error::Error;
};

// A malformed explain or enumerate request; `field` is a JSON-style path.
class RequestError : public Error {
public:
    RequestError(std::string field, const std::string& message)
        : Error(field + ": " + message), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

}  // namespace cfgs
