#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace gp_pricer {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Kernel matrix stayed indefinite after the largest allowed jitter.
class FactorizationFailure : public Error {
public:
    using Error::Error;
};

/// Every hyperparameter candidate failed to factorize.
class OptimizationDegenerate : public Error {
public:
    using Error::Error;
};

/// Link output outside the support of the demand family.
class InvalidLink : public Error {
public:
    using Error::Error;
};

/// Price outside the region where an environment is defined.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Operation not available for this environment (e.g. no exact sale kernel).
class Unsupported : public Error {
public:
    using Error::Error;
};

/// Gaussian slice model asked to work with a standard deviation below the floor.
class DegenerateVariance : public Error {
public:
    using Error::Error;
};

class ShapeMismatch : public Error {
public:
    using Error::Error;
};

/// Relative regret is undefined when the optimal expected revenue is not positive.
class DegenerateOptimum : public Error {
public:
    using Error::Error;
};

/// A run failed part-way; the steps completed so far are kept in `partial`.
template <typename Trace>
class RunAborted : public Error {
public:
    RunAborted(const std::string& what, Trace partial)
        : Error(what), partial_(std::move(partial)) {}

    const Trace& partial() const noexcept { return partial_; }

private:
    Trace partial_;
};

/// Configuration rejected during validation. `line` is 1-based, 0 when unknown.
class ConfigError : public Error {
public:
    ConfigError(const std::string& what, int line)
        : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

    int line() const noexcept { return line_; }

private:
    int line_;
};

}  // namespace gp_pricer
