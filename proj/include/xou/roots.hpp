#pragma once

// Bracketed scalar root finding shared by every threshold solver.

#include <cmath>
#include <string>

#include "xou/errors.hpp"

namespace xou {

struct RootOptions {
    double x_tol = 1e-12;
    int max_iterations = 200;
};

struct RootResult {
    double x;
    double residual;       ///< f(x) at the returned point
    double bracket_width;  ///< width of the final bracket
    int iterations;
};

/// Bisection on [lo, hi]; f(lo) and f(hi) must have opposite signs.
template <class Fn>
RootResult bisect(Fn&& f, double lo, double hi, const RootOptions& opts = {},
                  const std::string& what = "bisection") {
    double f_lo = f(lo);
    double f_hi = f(hi);
    if (f_lo == 0.0) return {lo, 0.0, 0.0, 0};
    if (f_hi == 0.0) return {hi, 0.0, 0.0, 0};
    if (!(std::signbit(f_lo) != std::signbit(f_hi)) || std::isnan(f_lo) || std::isnan(f_hi)) {
        throw SolverFailure(what + ": no sign change", lo, hi, 0);
    }
    int it = 0;
    while (hi - lo > opts.x_tol && it < opts.max_iterations) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;  // interval at machine resolution
        const double f_mid = f(mid);
        ++it;
        if (f_mid == 0.0) return {mid, 0.0, 0.0, it};
        if (std::isnan(f_mid)) throw SolverFailure(what + ": NaN residual", lo, hi, it);
        if (std::signbit(f_mid) == std::signbit(f_lo)) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
            f_hi = f_mid;
        }
    }
    if (hi - lo > opts.x_tol && it >= opts.max_iterations) {
        throw SolverFailure(what + ": iteration limit", lo, hi, it);
    }
    // Report the endpoint with the smaller residual.
    if (std::fabs(f_lo) <= std::fabs(f_hi)) return {lo, f_lo, hi - lo, it};
    return {hi, f_hi, hi - lo, it};
}

struct Bracket {
    double lo;
    double hi;
};

/// Walks from `anchor` in `direction` (+1 or -1) with doubling steps until
/// f changes sign relative to f(anchor). Returns the bracketing interval.
template <class Fn>
Bracket expand_bracket(Fn&& f, double anchor, int direction, double initial_step = 0.25,
                       int max_doublings = 200, const std::string& what = "bracket") {
    const double f_anchor = f(anchor);
    double prev = anchor;
    double step = initial_step;
    for (int i = 0; i < max_doublings; ++i) {
        const double next = anchor + direction * step;
        const double f_next = f(next);
        if (std::isnan(f_next)) break;
        if (f_next == 0.0 || std::signbit(f_next) != std::signbit(f_anchor)) {
            return direction > 0 ? Bracket{prev, next} : Bracket{next, prev};
        }
        prev = next;
        step *= 2.0;
    }
    throw SolverFailure(what + ": no sign change while expanding", std::fmin(anchor, prev),
                        std::fmax(anchor, prev), max_doublings);
}

}  // namespace xou
