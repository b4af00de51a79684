#pragma once

// Maximum-likelihood fit of (mu, theta, sigma) from log prices sampled on a
// uniform grid, using the exact AR(1) form of the OU transition:
//   X_{k+1} = theta (1 - phi) + phi X_k + eps_k,  phi = exp(-mu dt),
//   Var eps = sigma^2 (1 - phi^2) / (2 mu).

#include <istream>
#include <string>
#include <vector>

#include "xou/model.hpp"

namespace xou {

struct PriceSeries {
    std::vector<double> time;
    std::vector<double> price;
};

/// Reads a CSV with a header row and columns (timestamp, price). Timestamps
/// must be numeric and strictly increasing.
PriceSeries read_price_csv(std::istream& in);
PriceSeries read_price_csv_file(const std::string& path);

struct CalibrationResult {
    double mu;
    double theta;
    double sigma;
    double se_mu;
    double se_theta;
    double se_sigma;
    double phi;  ///< AR(1) slope exp(-mu dt)
    double dt;
    std::size_t n_obs;
    double log_likelihood;
};

inline constexpr std::size_t kMinObservations = 30;

/// Fits log prices. Throws ValidationError on too few points, non-positive
/// prices, non-uniform spacing, a degenerate (constant) series or a slope
/// outside (0, 1). When dt <= 0 it is taken from the timestamps.
CalibrationResult calibrate(const PriceSeries& series, double dt = 0.0);

/// Same fit from log prices already on a grid of step dt.
CalibrationResult calibrate_log_prices(const std::vector<double>& x, double dt);

}  // namespace xou
