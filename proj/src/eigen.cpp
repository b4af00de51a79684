#include "xou/eigen.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "xou/errors.hpp"

namespace xou {

void QuadratureConfig::validate() const {
    if (!(rel_tol > 0.0)) throw ValidationError("quadrature rel_tol must be positive");
    if (!(abs_tol > 0.0)) throw ValidationError("quadrature abs_tol must be positive");
    if (max_subdivisions == 0) throw ValidationError("quadrature max_subdivisions must be positive");
    if (!(log_cutoff > 10.0)) throw ValidationError("quadrature log_cutoff must exceed 10");
}

namespace {

using GK = boost::math::quadrature::gauss_kronrod<double, 31>;

double log_add(double a, double b) {
    if (a == -std::numeric_limits<double>::infinity()) return b;
    if (b == -std::numeric_limits<double>::infinity()) return a;
    const double hi = std::max(a, b);
    return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

struct Segment {
    double lo;
    double hi;
};

// Sums GK estimates over segments of a non-negative integrand. Returns
// (integral, absolute error estimate).
template <class Fn>
std::pair<double, double> integrate_segments(Fn&& f, const std::vector<Segment>& segs,
                                             const QuadratureConfig& quad, double segment_tol = 1e-2) {
    double total = 0.0;
    double err_total = 0.0;
    for (const auto& s : segs) {
        if (!(s.hi > s.lo)) continue;
        double err = 0.0;
        double l1 = 0.0;
        const double v = GK::integrate(f, s.lo, s.hi, quad.max_subdivisions, quad.rel_tol * segment_tol, &err, &l1);
        total += v;
        err_total += err;
    }
    return {total, err_total};
}

void check_accuracy(double value, double err, const QuadratureConfig& quad, const char* what) {
    if (!std::isfinite(value) || value <= 0.0) {
        throw NumericFailure(std::string(what) + ": non-positive or non-finite integral", err);
    }
    if (err > quad.rel_tol * value && err > quad.abs_tol) {
        throw NumericFailure(std::string(what) + ": quadrature did not converge", err / value);
    }
}

// Walks right from `start` with doubling steps until phi drops `drop` below `ref`.
template <class Phi>
double right_cutoff(Phi&& phi, double start, double ref, double drop, double step) {
    double s = step;
    for (int i = 0; i < 200; ++i) {
        const double u = start + s;
        if (phi(u) < ref - drop) return u;
        s *= 2.0;
    }
    return start + s;
}

// log int_0^inf t^(alpha-1) exp(beta t - gamma t^2 / 2) dt, gamma > 0.
LogIntegral split_core(double alpha, double beta, double gamma, const QuadratureConfig& quad) {
    // For beta > 0 write beta u - gamma u^2/2 = offset - gamma (u - beta/gamma)^2 / 2; the
    // unshifted form loses the integrand's low digits once the exponent is in the thousands.
    const double centre = beta > 0.0 ? beta / gamma : 0.0;
    const double offset = beta > 0.0 ? 0.5 * beta * centre : 0.0;
    auto phi = [=](double u) {
        if (beta > 0.0) return (alpha - 1.0) * std::log(u) - 0.5 * gamma * (u - centre) * (u - centre);
        return (alpha - 1.0) * std::log(u) + beta * u - 0.5 * gamma * u * u;
    };

    // Series part: exp(beta u - gamma u^2/2) = sum c_k u^k with (k+1) c_{k+1} = beta c_k - gamma c_{k-1}.
    const double u0 = std::min(0.5, 0.5 / std::max(std::fabs(beta), 1e-300));
    double c_prev = 0.0;
    double c_k = 1.0;
    double pw = std::pow(u0, alpha);
    double series = 0.0;
    int small_run = 0;
    for (int k = 0; k < 400; ++k) {
        const double term = c_k * pw / (k + alpha);
        series += term;
        // Odd or even coefficients can vanish individually (beta = 0), so wait for two in a row.
        small_run = std::fabs(term) < 1e-18 * std::fabs(series) ? small_run + 1 : 0;
        if (k > 2 && small_run >= 2) break;
        const double c_next = (beta * c_k - gamma * c_prev) / (k + 1);
        c_prev = c_k;
        c_k = c_next;
        pw *= u0;
    }
    const double log_series = series > 0.0 ? std::log(series) : -std::numeric_limits<double>::infinity();

    // Interior local maximum of phi on (u0, inf), if any: gamma u^2 - beta u - (alpha - 1) = 0.
    double u_max = -1.0;
    const double disc = beta * beta + 4.0 * gamma * (alpha - 1.0);
    if (disc >= 0.0) {
        const double root = std::sqrt(disc);
        double cand = -1.0;
        if (beta > 0.0) {
            cand = (beta + root) / (2.0 * gamma);
        } else if (alpha > 1.0) {
            cand = 2.0 * (alpha - 1.0) / (root - beta);
        }
        if (cand > u0) u_max = cand;
    }
    const double phi_u0 = phi(u0);
    const double phi_ref = u_max > 0.0 ? std::max(phi_u0, phi(u_max)) : phi_u0;
    const double drop = quad.log_cutoff;
    const double width = 1.0 / std::sqrt(gamma + std::fabs(alpha - 1.0) / (u_max > 0.0 ? u_max * u_max : 1.0));

    std::vector<Segment> segs;
    if (u_max > 0.0) {
        double left = u0;
        if (phi_u0 < phi_ref - drop) {
            double s = std::min(1.0, width);
            left = u_max;
            for (int i = 0; i < 200; ++i) {
                const double u = u_max - s;
                if (u <= u0) {
                    left = u0;
                    break;
                }
                if (phi(u) < phi_ref - drop) {
                    left = u;
                    break;
                }
                s *= 2.0;
            }
        }
        const double right = right_cutoff(phi, u_max, phi_ref, drop, std::min(1.0, width));
        segs.push_back({left, u_max});
        segs.push_back({u_max, right});
    } else {
        const double slope = std::fabs((alpha - 1.0) / u0 + beta - gamma * u0);
        const double right = right_cutoff(phi, u0, phi_ref, drop, 1.0 / (1.0 + slope));
        segs.push_back({u0, right});
    }

    // Integrate in v = u - pivot so that abscissae near a far-out peak keep their
    // low-order digits.
    const double pivot = u_max > 0.0 ? u_max : 0.0;
    const double pivot_gap = pivot - centre;
    auto g = [&](double v) {
        const double u = pivot + v;
        double p = (alpha - 1.0) * std::log(u);
        if (beta > 0.0) {
            const double w = v + pivot_gap;
            p -= 0.5 * gamma * w * w;
        } else {
            p += beta * u - 0.5 * gamma * u * u;
        }
        return std::exp(p - phi_ref);
    };
    for (auto& sg : segs) {
        sg.lo -= pivot;
        sg.hi -= pivot;
    }
    const auto [body, err] = integrate_segments(g, segs, quad);
    if (!(body > 0.0) || !(err <= quad.rel_tol * body || err <= quad.abs_tol)) {
        std::ostringstream what;
        what << "eigenfunction integral (alpha=" << alpha << ", beta=" << beta << ", gamma=" << gamma << ")";
        check_accuracy(body > 0.0 ? body : 1.0, err, quad, what.str().c_str());
    }

    const double log_body = offset + phi_ref + std::log(body);
    const double log_total = log_add(log_series, log_body);
    const double rel = err * std::exp(offset + phi_ref - log_total);
    return {log_total, rel};
}

LogIntegral split_route(double alpha, double b, const QuadratureConfig& quad) {
    if (b >= -1.0) return split_core(alpha, b, 1.0, quad);
    // Far left: u = t / |b| turns the integrand into a mildly perturbed gamma density.
    LogIntegral r = split_core(alpha, -1.0, 1.0 / (b * b), quad);
    r.log_value -= alpha * std::log(-b);
    return r;
}

LogIntegral power_route(double alpha, double b, const QuadratureConfig& quad) {
    // u = v^k:  I = k int_0^inf v^(k alpha - 1) exp(b v^k - v^(2k)/2) dv.
    // k = 1/alpha removes the singularity when alpha < 1; otherwise k = 4 keeps
    // the power factor smooth enough for Gauss-Kronrod.
    const double k = alpha < 1.0 ? 1.0 / alpha : 4.0;
    const double m = k * alpha - 1.0;
    // Extra room covers the u^(alpha-1) factor the parabola bound ignores.
    const double drop = quad.log_cutoff + 20.0;
    const double mode = alpha > 1.0 ? 0.5 * (b + std::sqrt(b * b + 4.0 * (alpha - 1.0))) : std::max(b, 0.0);
    // For b > 0 write b u - u^2/2 = b^2/2 - (u - b)^2/2 to avoid cancellation.
    const bool shifted = b > 0.0;
    auto expo = [&](double u) { return shifted ? -0.5 * (u - b) * (u - b) : b * u - 0.5 * u * u; };
    const double ref = (alpha - 1.0) * (mode > 0.0 ? std::log(mode) : 0.0) + expo(mode);
    auto g = [&](double v) {
        if (v <= 0.0) return m == 0.0 ? std::exp(expo(0.0) - ref) : 0.0;
        const double u = std::pow(v, k);
        return std::exp(m * std::log(v) + expo(u) - ref);
    };
    const double inv_k = 1.0 / k;
    std::vector<Segment> segs;
    if (b > 0.0) {
        const double w = std::sqrt(2.0 * drop);
        const double u_lo = std::max(0.0, b - w);
        const double u_hi = mode + w;
        segs.push_back({std::pow(u_lo, inv_k), std::pow(mode, inv_k)});
        segs.push_back({std::pow(mode, inv_k), std::pow(u_hi, inv_k)});
    } else {
        const double u_hi = std::max(mode, b + std::sqrt(b * b + 2.0 * drop)) + 1.0;
        // The plateau ends near |b| u ~ 1; split there to help the adaptive rule.
        const double u_knee = std::min(u_hi, 1.0 / std::max(std::fabs(b), 1.0));
        std::vector<double> cuts{0.0, u_knee, u_hi};
        if (mode > u_knee && mode < u_hi) cuts.insert(cuts.begin() + 2, mode);
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
            segs.push_back({std::pow(cuts[i], inv_k), std::pow(cuts[i + 1], inv_k)});
    }
    // v^k amplifies rounding in u by k, which puts a noise floor near 1e-12
    // under the integrand; a tighter per-segment target only burns depth.
    const auto [body, err] = integrate_segments(g, segs, quad, 0.25);
    check_accuracy(body, err, quad, "eigenfunction integral (power substitution)");
    const double offset = shifted ? 0.5 * b * b : 0.0;
    return {offset + ref + std::log(k * body), err / body};
}

}  // namespace

LogIntegral log_eigen_integral(double alpha, double b, const QuadratureConfig& quad, IntegralRoute route) {
    if (!(alpha > 0.0)) throw ValidationError("eigen integral requires alpha > 0");
    if (!std::isfinite(b)) throw ValidationError("eigen integral requires finite b");
    return route == IntegralRoute::Split ? split_route(alpha, b, quad) : power_route(alpha, b, quad);
}

double EigenPoint::log_wronskian() const {
    // W = F G (F'/F - G'/G)
    return log_F + log_G + std::log(dlog_F - dlog_G);
}

EigenSystem::EigenSystem(const ModelParams& params, const QuadratureConfig& quad)
    : params_(params), quad_(quad), scale_(params.scale()), alpha_(params.r / params.mu) {
    params_.validate();
    quad_.validate();
}

EigenPoint EigenSystem::compute(double x) const {
    const double b = scale_ * (x - params_.theta);
    const auto f0 = log_eigen_integral(alpha_, b, quad_);
    const auto f1 = log_eigen_integral(alpha_ + 1.0, b, quad_);
    const auto f2 = log_eigen_integral(alpha_ + 2.0, b, quad_);
    const auto g0 = log_eigen_integral(alpha_, -b, quad_);
    const auto g1 = log_eigen_integral(alpha_ + 1.0, -b, quad_);
    const auto g2 = log_eigen_integral(alpha_ + 2.0, -b, quad_);

    EigenPoint pt{};
    pt.x = x;
    pt.log_F = f0.log_value;
    pt.dlog_F = scale_ * std::exp(f1.log_value - f0.log_value);
    pt.d2_F = scale_ * scale_ * std::exp(f2.log_value - f0.log_value);
    pt.log_G = g0.log_value;
    pt.dlog_G = -scale_ * std::exp(g1.log_value - g0.log_value);
    pt.d2_G = scale_ * scale_ * std::exp(g2.log_value - g0.log_value);
    pt.rel_error = std::max({f0.rel_error, f1.rel_error, f2.rel_error, g0.rel_error, g1.rel_error, g2.rel_error});
    return pt;
}

const EigenPoint& EigenSystem::at(double x) const {
    const auto key = std::bit_cast<std::uint64_t>(x);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    return cache_.emplace(key, compute(x)).first->second;
}

EigenEval EigenSystem::eval_F(double x, int order) const {
    if (order < 0 || order > 2) throw ValidationError("eigenfunction order must be 0, 1 or 2");
    const auto& pt = at(x);
    double log_v = pt.log_F;
    if (order == 1) log_v += std::log(pt.dlog_F);
    if (order == 2) log_v += std::log(pt.d2_F);
    return {std::exp(log_v), log_v, +1, order};
}

EigenEval EigenSystem::eval_G(double x, int order) const {
    if (order < 0 || order > 2) throw ValidationError("eigenfunction order must be 0, 1 or 2");
    const auto& pt = at(x);
    double log_v = pt.log_G;
    int sign = +1;
    if (order == 1) {
        log_v += std::log(-pt.dlog_G);
        sign = -1;
    }
    if (order == 2) log_v += std::log(pt.d2_G);
    return {sign * std::exp(log_v), log_v, sign, order};
}

double EigenSystem::F(double x) const { return std::exp(at(x).log_F); }

double EigenSystem::G(double x) const { return std::exp(at(x).log_G); }

double EigenSystem::psi(double x) const { return std::exp(at(x).log_psi()); }

double EigenSystem::wronskian(double x) const { return std::exp(at(x).log_wronskian()); }

double EigenSystem::log_psi_density(double x) const {
    const auto& pt = at(x);
    // Psi = 2 F / (sigma^2 W) = 2 / (sigma^2 G (F'/F - G'/G))
    return std::log(2.0 / (params_.sigma * params_.sigma)) - pt.log_G - std::log(pt.dlog_F - pt.dlog_G);
}

double EigenSystem::psi_density(double x) const { return std::exp(log_psi_density(x)); }

double EigenSystem::log_phi_density(double x) const {
    const auto& pt = at(x);
    return std::log(2.0 / (params_.sigma * params_.sigma)) - pt.log_F - std::log(pt.dlog_F - pt.dlog_G);
}

double EigenSystem::phi_density(double x) const { return std::exp(log_phi_density(x)); }

double EigenSystem::discounted_hitting_factor(double x, double kappa) const {
    if (x == kappa) return 1.0;
    if (x < kappa) return std::exp(at(x).log_F - at(kappa).log_F);
    return std::exp(at(x).log_G - at(kappa).log_G);
}

}  // namespace xou
