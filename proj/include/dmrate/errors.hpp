#pragma once

#include <stdexcept>
#include <string>

namespace dmrate {

// Raised when an adaptive numerical procedure cannot reach its tolerance.
class NumericalFailure : public std::runtime_error {
public:
    NumericalFailure(const std::string& what, double achieved)
        : std::runtime_error(what + " (achieved error estimate " + std::to_string(achieved) + ")"),
          achieved_(achieved) {}
    double achieved() const noexcept { return achieved_; }

private:
    double achieved_;
};

// Raised when the feasibility pre-solve cannot satisfy the constraint set.
class InfeasibleConstraints : public std::runtime_error {
public:
    InfeasibleConstraints(const std::string& what, double max_residual)
        : std::runtime_error(what + " (max residual " + std::to_string(max_residual) + ")"),
          max_residual_(max_residual) {}
    double max_residual() const noexcept { return max_residual_; }

private:
    double max_residual_;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace dmrate
