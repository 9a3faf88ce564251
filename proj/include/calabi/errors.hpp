#pragma once

#include <stdexcept>
#include <string>

namespace calabi {

/// Point or parameter outside the domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A documented precondition of an operation does not hold.
class PreconditionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Input rejected by the resonance guard: a floor argument sits too close to an integer.
class PrecisionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Iterative numerics failed to reach the requested tolerance.
class NumericError : public std::runtime_error {
public:
    NumericError(const std::string& what, double partial_estimate, double error_estimate)
        : std::runtime_error(what), partial_(partial_estimate), error_(error_estimate) {}

    double partial_estimate() const noexcept { return partial_; }
    double error_estimate() const noexcept { return error_; }

private:
    double partial_;
    double error_;
};

/// A configured budget (sequence length, iteration count) was exceeded.
class ResourceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Two independent routes to the same quantity disagreed.
class ConsistencyError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// A file could not be read or written.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input document; `where` is a JSON pointer or a byte offset.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& where, const std::string& what)
        : std::runtime_error(where + ": " + what), where_(where) {}
    const std::string& where() const noexcept { return where_; }

private:
    std::string where_;
};

}  // namespace calabi
