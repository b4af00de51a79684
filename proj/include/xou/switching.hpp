#pragma once

// Infinite sequence of entries and exits. Classification between "never
// enter" and "recurrent trading", and the recurrent thresholds obtained from
// the q / q_F / q_G / beta system.

#include <optional>
#include <variant>

#include "xou/double_stopping.hpp"
#include "xou/eigen.hpp"
#include "xou/model.hpp"

namespace xou {

/// Which reward the integral functionals act on.
enum class Reward { Sell, Buy };

// Integral functionals. With W the Wronskian, Psi = 2F/(sigma^2 W) and
// Phi = 2G/(sigma^2 W):
//   lower_integral(h, x) = int_{-inf}^x Psi (L - r) h = (h' F - h F') / W
//   upper_integral(h, x) = int_x^{+inf} Phi (L - r) h = (h G' - h' G) / W
double lower_integral(Reward h, double x, const EigenSystem& es, const Costs& costs);
double upper_integral(Reward h, double x, const EigenSystem& es, const Costs& costs);

/// Same integrals evaluated by adaptive quadrature of the weighted integrand,
/// truncated where it falls below `tail_tol` relative to the accumulated mass.
double lower_integral_quadrature(Reward h, double x, const EigenSystem& es, const Costs& costs,
                                 double tail_tol = 1e-14);
double upper_integral_quadrature(Reward h, double x, const EigenSystem& es, const Costs& costs,
                                 double tail_tol = 1e-14);
/// int_lo^hi Psi(s) e^s f_b(s) ds by quadrature.
double psi_weighted_buy_integral(double lo, double hi, const EigenSystem& es, const Costs& costs);

/// q(x) = int_{-inf}^x Psi (L - r) h_s.
double q(double x, const EigenSystem& es, const Costs& costs);
double q_F(double x, double z, const EigenSystem& es, const Costs& costs);
double q_G(double x, double z, const EigenSystem& es, const Costs& costs);

/// Root z > x_s of q_F(x, z) = 0.
double beta(double x, const EigenSystem& es, const Costs& costs, double z_tol = 1e-12);

/// Stationary point of h_b / F on (x_b1, x_b2), if any.
std::optional<double> solve_a_tilde(const EigenSystem& es, const Costs& costs, double x_tol = 1e-12);

enum class Theorem { NoRootOrSingle, RatioNotBelow, NoStationaryPoint, Recurrent };
const char* theorem_label(Theorem t);

struct CaseReport {
    FbRoots fb_root_case;
    bool a_tilde_exists = false;
    double a_tilde = 0.0;    ///< meaningful when a_tilde_exists
    double b_star = 0.0;
    double ratio_lhs = 0.0;  ///< (e^a + c_b) / F(a) at a = a_tilde
    double ratio_rhs = 0.0;  ///< (e^b - c_s) / F(b) at b = b_star
    bool ratio_tie = false;
    double integral_test_lhs = 0.0;  ///< |int_{-inf}^{x_b1} Psi e^x f_b|
    double integral_test_rhs = 0.0;  ///< int_{x_b1}^{x_b2} Psi e^x f_b
    bool integral_test_holds = false;
    Theorem chosen = Theorem::NoRootOrSingle;
};

CaseReport classify(const EigenSystem& es, const Costs& costs);

struct NoEntry {
    double b_star;
    double k;  ///< V(x) = k F(x) below b_star
};

struct Recurrent {
    double a_tilde;
    double d_tilde;
    double b_tilde;
    double P_t;
    double K_t;
    double Q_t;
    double residual_qF = 0.0;  ///< scaled q_F(d, b)
    double residual_qG = 0.0;  ///< scaled q_G(d, b)
    int outer_iterations = 0;
};

struct SwitchingSolution {
    std::variant<NoEntry, Recurrent> regime;
    CaseReport report;

    bool recurrent() const { return std::holds_alternative<Recurrent>(regime); }
    const Recurrent& rec() const { return std::get<Recurrent>(regime); }
    const NoEntry& no_entry() const { return std::get<NoEntry>(regime); }
};

SwitchingSolution solve_switching(const EigenSystem& es, const Costs& costs);

/// K, Q, P from the smooth-fit formulas at d_tilde; P from continuity at a_tilde.
Recurrent recurrent_from_thresholds(double a_tilde, double d_tilde, double b_tilde, const EigenSystem& es,
                                    const Costs& costs);

/// Value functions of the rule "buy at or below d (first entry in [a, d]), sell
/// at or above b, repeat" for arbitrary a <= d < b: K and Q follow from
/// continuity at d and b. At the optimal thresholds this agrees with
/// recurrent_from_thresholds; elsewhere smooth fit fails.
Recurrent threshold_strategy(double a, double d, double b, const EigenSystem& es, const Costs& costs);

/// J~ and V~ and their first two x-derivatives (order 0, 1, 2), piecewise analytic.
double value_J_tilde(double x, const SwitchingSolution& sol, const EigenSystem& es, const Costs& costs,
                     int order = 0);
double value_V_tilde(double x, const SwitchingSolution& sol, const EigenSystem& es, const Costs& costs,
                     int order = 0);

}  // namespace xou
