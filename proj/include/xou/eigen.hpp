#pragma once

// Increasing/decreasing solutions F, G of (L - r) u = 0 for the OU generator
//   L = sigma^2/2 d^2/dx^2 + mu (theta - x) d/dx
// given by
//   F(x) = int_0^inf u^{r/mu - 1} exp( c (x - theta) u - u^2/2) du
//   G(x) = int_0^inf u^{r/mu - 1} exp(-c (x - theta) u - u^2/2) du,  c = sqrt(2 mu / sigma^2).
// Every quantity is carried in log space (or as a logarithmic derivative) so
// that the solvers can work far into the tails where F or G over/underflow.

#include <cstdint>
#include <unordered_map>

#include "xou/model.hpp"

namespace xou {

struct QuadratureConfig {
    double rel_tol = 1e-10;
    double abs_tol = 1e-14;
    /// Maximum bisection depth of the adaptive Gauss-Kronrod rule.
    unsigned max_subdivisions = 15;
    /// The integrand tail is dropped once its log falls this far below the peak.
    double log_cutoff = 60.0;

    void validate() const;
};

enum class IntegralRoute {
    /// Power series on [0, u0], adaptive Gauss-Kronrod on [u0, inf).
    Split,
    /// Change of variable u = v^(1/alpha), which removes the u^(alpha-1) singularity.
    PowerSubstitution,
};

struct LogIntegral {
    double log_value;
    double rel_error;  ///< achieved relative error estimate
};

/// log int_0^inf u^(alpha-1) exp(b u - u^2/2) du for alpha > 0.
LogIntegral log_eigen_integral(double alpha, double b, const QuadratureConfig& quad,
                               IntegralRoute route = IntegralRoute::Split);

struct EigenEval {
    double value;      ///< may be 0 or inf when out of double range
    double log_value;  ///< log |value|, always finite
    int sign;          ///< +1 or -1 (derivatives of G alternate)
    int order;
};

/// F, G and their first two derivatives at one point, normalised by F and G.
struct EigenPoint {
    double x;
    double log_F;
    double dlog_F;   ///< F'/F
    double d2_F;     ///< F''/F
    double log_G;
    double dlog_G;   ///< G'/G
    double d2_G;     ///< G''/G
    double rel_error;

    /// log of the Wronskian F'G - FG' (> 0).
    double log_wronskian() const;
    /// log psi = log(F/G).
    double log_psi() const { return log_F - log_G; }
};

/// Evaluator bound to one parameter set. Holds a per-run memo cache keyed by
/// the exact bits of x; not safe for concurrent mutation, so give each worker
/// its own instance.
class EigenSystem {
public:
    explicit EigenSystem(const ModelParams& params, const QuadratureConfig& quad = {});

    const ModelParams& params() const { return params_; }
    const QuadratureConfig& quad() const { return quad_; }

    /// F, G and derivatives at x (memoised).
    const EigenPoint& at(double x) const;

    EigenEval eval_F(double x, int order) const;
    EigenEval eval_G(double x, int order) const;

    double F(double x) const;
    double G(double x) const;

    double psi(double x) const;
    double log_psi(double x) const { return at(x).log_psi(); }
    double wronskian(double x) const;
    /// Psi(x) = 2 F / (sigma^2 W)
    double psi_density(double x) const;
    double log_psi_density(double x) const;
    /// Phi(x) = 2 G / (sigma^2 W)
    double phi_density(double x) const;
    double log_phi_density(double x) const;

    /// E_x[exp(-r tau_kappa)]: F(x)/F(kappa) below kappa, G(x)/G(kappa) above.
    double discounted_hitting_factor(double x, double kappa) const;

    std::size_t cache_size() const { return cache_.size(); }
    void clear_cache() const { cache_.clear(); }

private:
    EigenPoint compute(double x) const;

    ModelParams params_;
    QuadratureConfig quad_;
    double scale_;
    double alpha_;
    mutable std::unordered_map<std::uint64_t, EigenPoint> cache_;
};

}  // namespace xou
