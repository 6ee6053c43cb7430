#pragma once

#include <stdexcept>
#include <string>

namespace llq {

/// Invalid user-facing parameters (maps to CLI exit code 2).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A numerical procedure failed to reach its target (maps to exit code 3).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when a single TEBD step discards more weight than allowed.
class TruncationAbort : public NumericalError {
public:
    TruncationAbort(const std::string& what, double weight, double time)
        : NumericalError(what), weight_(weight), time_(time) {}
    double weight() const noexcept { return weight_; }
    double time() const noexcept { return time_; }

private:
    double weight_;
    double time_;
};

}  // namespace llq
