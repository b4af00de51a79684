#pragma once

#include <stdexcept>
#include <string>

namespace xou {

/// Invalid user input (parameters, configuration, data files).
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A bracketed root search could not bracket or did not converge.
class SolverFailure : public std::runtime_error {
public:
    SolverFailure(const std::string& what, double lo, double hi, int iterations)
        : std::runtime_error(what + " [bracket=(" + std::to_string(lo) + ", " +
                             std::to_string(hi) + "), iterations=" +
                             std::to_string(iterations) + "]"),
          lo_(lo), hi_(hi), iterations_(iterations) {}

    double lo() const noexcept { return lo_; }
    double hi() const noexcept { return hi_; }
    int iterations() const noexcept { return iterations_; }

private:
    double lo_;
    double hi_;
    int iterations_;
};

/// Quadrature did not reach the requested accuracy.
class NumericFailure : public std::runtime_error {
public:
    NumericFailure(const std::string& what, double error_estimate)
        : std::runtime_error(what + " [error estimate=" + std::to_string(error_estimate) + "]"),
          error_estimate_(error_estimate) {}

    double error_estimate() const noexcept { return error_estimate_; }

private:
    double error_estimate_;
};

/// sup(V - h_b) <= 0: entering the market is never worthwhile.
class TrivialProblem : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace xou
