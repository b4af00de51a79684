#pragma once

// One round trip: wait to buy at h_b, then wait to sell at h_s.

#include "xou/eigen.hpp"
#include "xou/model.hpp"
#include "xou/roots.hpp"

namespace xou {

struct ThresholdDiagnostics {
    double residual = 0.0;       ///< scaled residual of the defining equation
    double bracket_width = 0.0;  ///< final bisection bracket
    int iterations = 0;
};

struct ExitSolution {
    double b_star;
    double k;  ///< V(x) = k F(x) below b_star, k = (e^b - c_s) / F(b)
    ThresholdDiagnostics diag;
};

struct DoubleStoppingSolution {
    double b_star;
    double a_star;
    double d_star;
    double P;
    double Q;
    double k;  ///< exit coefficient, see ExitSolution
    ThresholdDiagnostics b_diag;
    ThresholdDiagnostics a_diag;
    ThresholdDiagnostics d_diag;
    ExitSolution exit() const { return {b_star, k, b_diag}; }
};

/// Scaled residual of e^b F(b) = (e^b - c_s) F'(b), i.e. 1 - (1 - c_s e^-b) F'/F.
double exit_residual(double b, const EigenSystem& es, const Costs& costs);

ExitSolution solve_exit(const EigenSystem& es, const Costs& costs, const RootOptions& opts = {});

/// V(x): k F(x) below b_star, h_s(x) above.
double value_exit(double x, const ExitSolution& exit, const EigenSystem& es, const Costs& costs);
/// V'(x), analytic on each side of b_star (left derivative at b_star).
double value_exit_derivative(double x, const ExitSolution& exit, const EigenSystem& es, const Costs& costs);
/// V''(x), analytic on each side of b_star.
double value_exit_second(double x, const ExitSolution& exit, const EigenSystem& es, const Costs& costs);

/// Residual of G(d)(V'(d) - e^d) = G'(d)(V(d) - h_b(d)), divided by G(d).
double entry_residual_G(double d, const ExitSolution& exit, const EigenSystem& es, const Costs& costs);
/// Residual of F(a)(V'(a) - e^a) = F'(a)(V(a) - h_b(a)), divided by F(a).
double entry_residual_F(double a, const ExitSolution& exit, const EigenSystem& es, const Costs& costs);

/// Solves d_star then a_star. Throws TrivialProblem when f_b has fewer than
/// two roots or when V - h_b is not positive at the candidate d_star.
DoubleStoppingSolution solve_entry(const EigenSystem& es, const Costs& costs, const ExitSolution& exit,
                                   const RootOptions& opts = {});

DoubleStoppingSolution solve_double_stopping(const EigenSystem& es, const Costs& costs,
                                             const RootOptions& opts = {});

/// J(x): P F(x) below a_star, V - h_b on [a_star, d_star], Q G(x) above d_star.
double value_entry(double x, const DoubleStoppingSolution& sol, const EigenSystem& es, const Costs& costs);
double value_entry_derivative(double x, const DoubleStoppingSolution& sol, const EigenSystem& es,
                              const Costs& costs);

/// Expected discounted cash flow of the rule "buy on the first visit to
/// [a, d], then sell on the first visit to [b, inf)" started from x, for
/// arbitrary thresholds a <= d < b under continuous monitoring.
double strategy_value(double x, double a, double d, double b, const EigenSystem& es, const Costs& costs);

}  // namespace xou
