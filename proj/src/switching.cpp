#include "xou/switching.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "xou/errors.hpp"
#include "xou/roots.hpp"

namespace xou {

namespace {

double reward(Reward h, double x, const Costs& costs) {
    return h == Reward::Sell ? reward_sell(x, costs) : reward_buy(x, costs);
}

// e^x f(x) = (L - r) h(x)
double generator_term(Reward h, double x, const EigenSystem& es, const Costs& costs) {
    const double f = h == Reward::Sell ? f_sell(x, es.params(), costs) : f_buy(x, es.params(), costs);
    return std::exp(x) * f;
}

double log_density(bool lower, double s, const EigenSystem& es) {
    return lower ? es.log_psi_density(s) : es.log_phi_density(s);
}

// int over [lo, hi] of exp(log_density) * (L - r) h, in unit pieces.
double weighted_integral(bool lower, Reward h, double lo, double hi, const EigenSystem& es, const Costs& costs) {
    using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
    auto f = [&](double s) {
        const double g = generator_term(h, s, es, costs);
        if (g == 0.0) return 0.0;
        return std::exp(log_density(lower, s, es)) * g;
    };
    const int pieces = std::max(1, static_cast<int>(std::ceil(hi - lo)));
    const double w = (hi - lo) / pieces;
    double total = 0.0;
    for (int i = 0; i < pieces; ++i) {
        const double a = lo + i * w;
        const double b = i + 1 == pieces ? hi : a + w;
        total += GK::integrate(f, a, b, 12, 1e-13);
    }
    return total;
}

// Walks away from x until |integrand| is negligible against the largest value seen.
double truncation_point(bool lower, Reward h, double x, const EigenSystem& es, const Costs& costs,
                        double tail_tol) {
    const double dir = lower ? -1.0 : +1.0;
    auto log_abs = [&](double s) {
        const double g = generator_term(h, s, es, costs);
        return log_density(lower, s, es) + std::log(std::max(std::fabs(g), 1e-300));
    };
    double peak = log_abs(x);
    double s = x;
    const double drop = -std::log(tail_tol);
    for (int i = 0; i < 400; ++i) {
        s += dir * 0.5;
        const double v = log_abs(s);
        peak = std::max(peak, v);
        if (v < peak - drop) return s;
    }
    throw NumericFailure("integral tail did not decay", 0.0);
}

// Sum of the absolute terms of the closed forms, used to scale residuals.
double lower_magnitude(Reward h, double x, const EigenSystem& es, const Costs& costs) {
    const auto& pt = es.at(x);
    return std::exp(-pt.log_G) * (std::exp(x) + std::fabs(reward(h, x, costs) * pt.dlog_F)) /
           (pt.dlog_F - pt.dlog_G);
}

double upper_magnitude(Reward h, double x, const EigenSystem& es, const Costs& costs) {
    const auto& pt = es.at(x);
    return std::exp(-pt.log_F) * (std::exp(x) + std::fabs(reward(h, x, costs) * pt.dlog_G)) /
           (pt.dlog_F - pt.dlog_G);
}

double scaled_gap(double value, double scale) { return scale > 0.0 ? value / scale : value; }

}  // namespace

double lower_integral(Reward h, double x, const EigenSystem& es, const Costs& costs) {
    const auto& pt = es.at(x);
    const double hv = reward(h, x, costs);
    return std::exp(-pt.log_G) * (std::exp(x) - hv * pt.dlog_F) / (pt.dlog_F - pt.dlog_G);
}

double upper_integral(Reward h, double x, const EigenSystem& es, const Costs& costs) {
    const auto& pt = es.at(x);
    const double hv = reward(h, x, costs);
    return std::exp(-pt.log_F) * (hv * pt.dlog_G - std::exp(x)) / (pt.dlog_F - pt.dlog_G);
}

double lower_integral_quadrature(Reward h, double x, const EigenSystem& es, const Costs& costs, double tail_tol) {
    const double lo = truncation_point(true, h, x, es, costs, tail_tol);
    return weighted_integral(true, h, lo, x, es, costs);
}

double upper_integral_quadrature(Reward h, double x, const EigenSystem& es, const Costs& costs, double tail_tol) {
    const double hi = truncation_point(false, h, x, es, costs, tail_tol);
    return weighted_integral(false, h, x, hi, es, costs);
}

double psi_weighted_buy_integral(double lo, double hi, const EigenSystem& es, const Costs& costs) {
    return weighted_integral(true, Reward::Buy, lo, hi, es, costs);
}

double q(double x, const EigenSystem& es, const Costs& costs) { return lower_integral(Reward::Sell, x, es, costs); }

double q_F(double x, double z, const EigenSystem& es, const Costs& costs) {
    return lower_integral(Reward::Buy, x, es, costs) - lower_integral(Reward::Sell, z, es, costs);
}

double q_G(double x, double z, const EigenSystem& es, const Costs& costs) {
    return upper_integral(Reward::Buy, x, es, costs) - upper_integral(Reward::Sell, z, es, costs);
}

double beta(double x, const EigenSystem& es, const Costs& costs, double z_tol) {
    const ModelLandmarks lm = landmarks(es.params(), costs);
    const double buy_part = lower_integral(Reward::Buy, x, es, costs);
    auto f = [&](double z) { return buy_part - lower_integral(Reward::Sell, z, es, costs); };
    if (!(f(lm.x_s) < 0.0)) throw SolverFailure("beta: q_F(x, x_s) is not negative", x, lm.x_s, 0);
    const Bracket br = expand_bracket(f, lm.x_s, +1, 0.25, 200, "beta");
    return bisect(f, br.lo, br.hi, {z_tol, 200}, "beta").x;
}

std::optional<double> solve_a_tilde(const EigenSystem& es, const Costs& costs, double x_tol) {
    const ModelLandmarks lm = landmarks(es.params(), costs);
    const TwoRoots* roots = two_roots(lm);
    if (roots == nullptr) return std::nullopt;
    // (h_b / F)' has the sign of e^a - h_b F'/F.
    auto g = [&](double a) { return std::exp(a) / reward_buy(a, costs) - es.at(a).dlog_F; };
    const double g_lo = g(roots->x_b1);
    const double g_hi = g(roots->x_b2);
    if (!(g_lo < 0.0 && g_hi > 0.0)) return std::nullopt;
    return bisect(g, roots->x_b1, roots->x_b2, {x_tol, 200}, "a_tilde").x;
}

const char* theorem_label(Theorem t) {
    switch (t) {
        case Theorem::NoRootOrSingle: return "3(i)";
        case Theorem::RatioNotBelow: return "3(ii)";
        case Theorem::NoStationaryPoint: return "3(iii)";
        case Theorem::Recurrent: return "4";
    }
    return "?";
}

CaseReport classify(const EigenSystem& es, const Costs& costs) {
    const ModelLandmarks lm = landmarks(es.params(), costs);
    const ExitSolution exit = solve_exit(es, costs);

    CaseReport rep{};
    rep.fb_root_case = lm.fb_roots;
    rep.b_star = exit.b_star;
    rep.ratio_rhs = exit.k;

    const TwoRoots* roots = two_roots(lm);
    if (roots == nullptr) {
        rep.chosen = Theorem::NoRootOrSingle;
        return rep;
    }

    rep.integral_test_lhs = std::fabs(lower_integral_quadrature(Reward::Buy, roots->x_b1, es, costs));
    rep.integral_test_rhs = psi_weighted_buy_integral(roots->x_b1, roots->x_b2, es, costs);
    rep.integral_test_holds = rep.integral_test_lhs < rep.integral_test_rhs;

    const auto a_tilde = solve_a_tilde(es, costs);
    if (!a_tilde) {
        rep.chosen = Theorem::NoStationaryPoint;
        return rep;
    }
    rep.a_tilde_exists = true;
    rep.a_tilde = *a_tilde;
    rep.ratio_lhs = std::exp(std::log(reward_buy(*a_tilde, costs)) - es.at(*a_tilde).log_F);
    rep.ratio_tie = std::fabs(rep.ratio_lhs - rep.ratio_rhs) <= 1e-10 * std::fabs(rep.ratio_rhs);
    rep.chosen = (rep.ratio_tie || rep.ratio_lhs > rep.ratio_rhs) ? Theorem::RatioNotBelow : Theorem::Recurrent;
    return rep;
}

Recurrent recurrent_from_thresholds(double a_tilde, double d_tilde, double b_tilde, const EigenSystem& es,
                                    const Costs& costs) {
    Recurrent rec{};
    rec.a_tilde = a_tilde;
    rec.d_tilde = d_tilde;
    rec.b_tilde = b_tilde;
    const auto& pd = es.at(d_tilde);
    const double hb = reward_buy(d_tilde, costs);
    const double ed = std::exp(d_tilde);
    const double spread = pd.dlog_F - pd.dlog_G;
    rec.K_t = std::exp(-pd.log_F) * (ed - hb * pd.dlog_G) / spread;
    rec.Q_t = std::exp(-pd.log_G) * (ed - hb * pd.dlog_F) / spread;
    rec.P_t = rec.K_t - std::exp(std::log(reward_buy(a_tilde, costs)) - es.at(a_tilde).log_F);
    return rec;
}

Recurrent threshold_strategy(double a, double d, double b, const EigenSystem& es, const Costs& costs) {
    if (!(a <= d && d < b)) throw ValidationError("strategy thresholds must satisfy a <= d < b");
    // Continuity at d and b:  K F(d) - Q G(d) = h_b(d),  K F(b) - Q G(b) = h_s(b).
    const auto& pd = es.at(d);
    const auto& pb = es.at(b);
    const double growth = std::exp(pb.log_F - pd.log_F);
    const double denom = std::expm1(pb.log_psi() - pd.log_psi());
    Recurrent rec{};
    rec.a_tilde = a;
    rec.d_tilde = d;
    rec.b_tilde = b;
    rec.Q_t = std::exp(-pb.log_G) * (reward_sell(b, costs) - reward_buy(d, costs) * growth) / denom;
    rec.K_t = std::exp(-pd.log_F) * reward_buy(d, costs) + rec.Q_t * std::exp(pd.log_G - pd.log_F);
    rec.P_t = rec.K_t - std::exp(std::log(reward_buy(a, costs)) - es.at(a).log_F);
    return rec;
}

SwitchingSolution solve_switching(const EigenSystem& es, const Costs& costs) {
    SwitchingSolution sol{};
    sol.report = classify(es, costs);
    if (sol.report.chosen != Theorem::Recurrent) {
        const ExitSolution exit = solve_exit(es, costs);
        sol.regime = NoEntry{exit.b_star, exit.k};
        return sol;
    }

    const ModelLandmarks lm = landmarks(es.params(), costs);
    const TwoRoots& roots = *two_roots(lm);
    const double a_tilde = sol.report.a_tilde;

    auto outer = [&](double x) { return q_G(x, beta(x, es, costs), es, costs); };
    const RootResult rr = bisect(outer, a_tilde, roots.x_b2, {1e-11, 200}, "d_tilde");
    const double d = rr.x;
    const double b = beta(d, es, costs, 1e-13);

    Recurrent rec = recurrent_from_thresholds(a_tilde, d, b, es, costs);
    rec.residual_qF = scaled_gap(q_F(d, b, es, costs), lower_magnitude(Reward::Buy, d, es, costs) +
                                                           lower_magnitude(Reward::Sell, b, es, costs));
    rec.residual_qG = scaled_gap(q_G(d, b, es, costs), upper_magnitude(Reward::Buy, d, es, costs) +
                                                           upper_magnitude(Reward::Sell, b, es, costs));
    rec.outer_iterations = rr.iterations;
    sol.regime = rec;
    return sol;
}

namespace {

double F_k(double x, const EigenSystem& es, int order) {
    const auto& pt = es.at(x);
    const double f = std::exp(pt.log_F);
    return order == 0 ? f : order == 1 ? f * pt.dlog_F : f * pt.d2_F;
}

double G_k(double x, const EigenSystem& es, int order) {
    const auto& pt = es.at(x);
    const double g = std::exp(pt.log_G);
    return order == 0 ? g : order == 1 ? g * pt.dlog_G : g * pt.d2_G;
}

double exp_plus(double x, double c, int order) { return order == 0 ? std::exp(x) + c : std::exp(x); }

void check_order(int order) {
    if (order < 0 || order > 2) throw ValidationError("derivative order must be 0, 1 or 2");
}

}  // namespace

double value_J_tilde(double x, const SwitchingSolution& sol, const EigenSystem& es, const Costs& costs,
                     int order) {
    check_order(order);
    if (!sol.recurrent()) return 0.0;
    const Recurrent& r = sol.rec();
    if (x < r.a_tilde) return r.P_t * F_k(x, es, order);
    if (x <= r.d_tilde) return r.K_t * F_k(x, es, order) - exp_plus(x, costs.c_b, order);
    return r.Q_t * G_k(x, es, order);
}

double value_V_tilde(double x, const SwitchingSolution& sol, const EigenSystem& es, const Costs& costs,
                     int order) {
    check_order(order);
    if (!sol.recurrent()) {
        const NoEntry& n = sol.no_entry();
        if (x < n.b_star) return n.k * F_k(x, es, order);
        return exp_plus(x, -costs.c_s, order);
    }
    const Recurrent& r = sol.rec();
    if (x < r.b_tilde) return r.K_t * F_k(x, es, order);
    return r.Q_t * G_k(x, es, order) + exp_plus(x, -costs.c_s, order);
}

}  // namespace xou
