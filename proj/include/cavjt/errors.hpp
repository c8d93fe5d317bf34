// errors.hpp - exception types shared across the library.
//
// The CLI maps each category onto a process exit code:
//   ConfigError -> 2, NumericalGuardError -> 3, ValidationError -> 4, IoError -> 1.

#pragma once

#include <stdexcept>
#include <string>

namespace cavjt {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A numerical run was stopped because a conservation or containment guard tripped.
class NumericalGuardError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An iterative computation failed to reach its tolerance.
class ConvergenceError : public NumericalGuardError {
public:
    ConvergenceError(const std::string& what, double last, double previous)
        : NumericalGuardError(what), last_estimate(last), previous_estimate(previous) {}

    double last_estimate;
    double previous_estimate;
};

/// A truncated basis lost more weight than allowed.
class TruncationError : public NumericalGuardError {
public:
    TruncationError(const std::string& what, double loss)
        : NumericalGuardError(what), achieved_loss(loss) {}

    double achieved_loss;
};

class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A file could not be read or written.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace cavjt
