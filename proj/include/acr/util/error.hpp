#pragma once

#include <stdexcept>
#include <string>

namespace acr {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// DSL syntax or semantic error, positioned at a 1-based line and column.
class ParseError : public Error {
public:
    ParseError(int line, int column, const std::string& message)
        : Error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " +
                message),
          line_(line),
          column_(column),
          detail_(message) {}

    int line() const { return line_; }
    int column() const { return column_; }
    const std::string& detail() const { return detail_; }

private:
    int line_;
    int column_;
    std::string detail_;
};

/// A network violating the structural invariants (e.g. a reaction y -> y).
class NetworkError : public Error {
public:
    using Error::Error;
};

/// A rate law produced a NaN/negative value or a falling factorial overflowed.
class EvaluationError : public Error {
public:
    using Error::Error;
};

/// Invalid experiment configuration or command-line input.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A structural hypothesis of the limit construction does not hold.
class AssumptionViolation : public Error {
public:
    using Error::Error;
};

}  // namespace acr
