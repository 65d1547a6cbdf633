#pragma once

#include <stdexcept>
#include <string>

namespace foehn {

/// Base of every error raised by the library. The CLI maps any Error to
/// exit code 2 (data/estimation failure).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input text (timestamps, numbers, JSON). Carries the 1-based
/// line number when known, 0 otherwise.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line = 0)
        : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class ValueError : public Error {
public:
    using Error::Error;
};

class IntegrityError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class RangeError : public Error {
public:
    using Error::Error;
};

class SchemaError : public Error {
public:
    using Error::Error;
};

class RecipeError : public Error {
public:
    using Error::Error;
};

class ContractError : public Error {
public:
    using Error::Error;
};

class EstimationError : public Error {
public:
    using Error::Error;
};

class ConvergenceError : public EstimationError {
public:
    using EstimationError::EstimationError;
};

class DegenerateFitError : public EstimationError {
public:
    DegenerateFitError(const std::string& what, int component)
        : EstimationError(what), component_(component) {}
    int component() const noexcept { return component_; }

private:
    int component_;
};

} // namespace foehn
