#pragma once

// Exponential OU price model: xi_t = exp(X_t), dX = mu (theta - X) dt + sigma dB,
// with fixed buy/sell transaction costs and a constant discount rate.

#include <variant>

namespace xou {

struct ModelParams {
    double mu;     ///< mean-reversion speed (1/time)
    double theta;  ///< long-run mean of the log-price
    double sigma;  ///< volatility of the log-price (1/sqrt(time))
    double r;      ///< discount rate (1/time)

    /// Throws ValidationError unless mu, sigma, r > 0 and theta is finite.
    void validate() const;

    /// sqrt(2 mu / sigma^2), the scale of the eigenfunction integrands.
    double scale() const;
};

struct Costs {
    double c_b;  ///< fixed cost paid on entry
    double c_s;  ///< fixed cost paid on exit

    /// Both costs must be strictly positive.
    void validate() const;
};

/// Sell reward h_s(x) = e^x - c_s.
double reward_sell(double x, const Costs& costs);
/// Buy cost h_b(x) = e^x + c_b.
double reward_buy(double x, const Costs& costs);

/// f_s with (L - r) h_s = e^x f_s.
double f_sell(double x, const ModelParams& params, const Costs& costs);
/// f_b with (L - r) h_b = e^x f_b.
double f_buy(double x, const ModelParams& params, const Costs& costs);

struct NoRoot {};
struct SingleRoot {
    double x0;
};
struct TwoRoots {
    double x_b1;
    double x_b2;
};
using FbRoots = std::variant<NoRoot, SingleRoot, TwoRoots>;

struct ModelLandmarks {
    double x_s;       ///< unique root of f_s
    FbRoots fb_roots;
    double x_crit;    ///< argmax of f_b, ln(r c_b / mu)
    double x_star;    ///< theta + sigma^2/(2 mu) - r/mu - 1
};

/// Locates x_s and classifies/locates the roots of f_b.
ModelLandmarks landmarks(const ModelParams& params, const Costs& costs);

inline const TwoRoots* two_roots(const ModelLandmarks& lm) {
    return std::get_if<TwoRoots>(&lm.fb_roots);
}

}  // namespace xou
