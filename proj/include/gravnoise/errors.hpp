#pragma once

#include <stdexcept>
#include <string>

namespace gravnoise {

/// Base class for every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain of the operation (negative mass,
/// unphysical rates, a violated model constraint, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// A numerical procedure failed to reach its tolerance. Carries the best
/// error estimate that was achieved so callers can decide what to do.
class NumericError : public Error {
public:
    NumericError(const std::string& what, double achieved_error)
        : Error(what), achieved_error_(achieved_error) {}
    explicit NumericError(const std::string& what) : NumericError(what, 0.0) {}

    double achieved_error() const noexcept { return achieved_error_; }

private:
    double achieved_error_;
};

/// The Fock-space truncation of the hybrid engine is no longer faithful.
class TruncationError : public NumericError {
public:
    TruncationError(const std::string& what, double edge_population)
        : NumericError(what, edge_population) {}
};

/// Malformed or incomplete run configuration. `field()` names the offending
/// key path, e.g. "experiment.m1".
class ConfigError : public Error {
public:
    ConfigError(const std::string& field, const std::string& what)
        : Error(field.empty() ? what : field + ": " + what), field_(field) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace gravnoise
