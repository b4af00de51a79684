#include "xou/model.hpp"

#include <cmath>
#include <string>

#include "xou/errors.hpp"
#include "xou/roots.hpp"

namespace xou {

void ModelParams::validate() const {
    if (!(mu > 0.0) || !std::isfinite(mu)) throw ValidationError("mu must be positive, got " + std::to_string(mu));
    if (!(sigma > 0.0) || !std::isfinite(sigma))
        throw ValidationError("sigma must be positive, got " + std::to_string(sigma));
    if (!(r > 0.0) || !std::isfinite(r)) throw ValidationError("r must be positive, got " + std::to_string(r));
    if (!std::isfinite(theta)) throw ValidationError("theta must be finite");
}

double ModelParams::scale() const { return std::sqrt(2.0 * mu / (sigma * sigma)); }

void Costs::validate() const {
    if (!(c_b > 0.0) || !std::isfinite(c_b)) throw ValidationError("c_b must be positive, got " + std::to_string(c_b));
    if (!(c_s > 0.0) || !std::isfinite(c_s)) throw ValidationError("c_s must be positive, got " + std::to_string(c_s));
}

double reward_sell(double x, const Costs& costs) { return std::exp(x) - costs.c_s; }

double reward_buy(double x, const Costs& costs) { return std::exp(x) + costs.c_b; }

namespace {

double drift_constant(const ModelParams& p) { return p.mu * p.theta + 0.5 * p.sigma * p.sigma - p.r; }

}  // namespace

double f_sell(double x, const ModelParams& params, const Costs& costs) {
    return drift_constant(params) - params.mu * x + params.r * costs.c_s * std::exp(-x);
}

double f_buy(double x, const ModelParams& params, const Costs& costs) {
    return drift_constant(params) - params.mu * x - params.r * costs.c_b * std::exp(-x);
}

ModelLandmarks landmarks(const ModelParams& params, const Costs& costs) {
    params.validate();
    costs.validate();

    ModelLandmarks lm{};
    lm.x_crit = std::log(params.r * costs.c_b / params.mu);
    lm.x_star = params.theta + params.sigma * params.sigma / (2.0 * params.mu) - params.r / params.mu - 1.0;

    const RootOptions opts{1e-12, 200};

    // f_s is strictly decreasing: expand from theta toward its sign change.
    auto fs = [&](double x) { return f_sell(x, params, costs); };
    const int dir_s = fs(params.theta) > 0.0 ? +1 : -1;
    const Bracket bs = expand_bracket(fs, params.theta, dir_s, 0.25, 200, "x_s");
    lm.x_s = bisect(fs, bs.lo, bs.hi, opts, "x_s").x;

    auto fb = [&](double x) { return f_buy(x, params, costs); };
    const double peak = fb(lm.x_crit);
    const double tie = 1e-12 * (1.0 + std::fabs(drift_constant(params)));
    if (std::fabs(peak) <= tie) {
        lm.fb_roots = SingleRoot{lm.x_crit};
    } else if (peak < 0.0) {
        lm.fb_roots = NoRoot{};
    } else {
        const Bracket left = expand_bracket(fb, lm.x_crit, -1, 0.25, 200, "x_b1");
        const Bracket right = expand_bracket(fb, lm.x_crit, +1, 0.25, 200, "x_b2");
        lm.fb_roots = TwoRoots{bisect(fb, left.lo, left.hi, opts, "x_b1").x,
                               bisect(fb, right.lo, right.hi, opts, "x_b2").x};
    }
    return lm;
}

}  // namespace xou
