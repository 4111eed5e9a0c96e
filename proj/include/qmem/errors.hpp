#pragma once

#include <stdexcept>
#include <string>

namespace qmem {

/// Invalid argument or parameter outside the model's domain.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A numerical procedure failed (non-convergence, NaN, ...).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Adaptive integration could not proceed; carries the time reached.
class StiffnessError : public NumericalError {
public:
    StiffnessError(const std::string& what, double t_reached)
        : NumericalError(what), t_reached_(t_reached) {}
    double t_reached() const noexcept { return t_reached_; }

private:
    double t_reached_;
};

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class InsufficientDataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class FitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when config text cannot be parsed; line is 1-based, 0 for overrides.
class ParseError : public ConfigError {
public:
    ParseError(const std::string& what, int line) : ConfigError(what), line_(line) {}
    int line() const noexcept { return line_; }

private:
    int line_;
};

}  // namespace qmem
