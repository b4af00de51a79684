#include "xou/double_stopping.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "xou/errors.hpp"

namespace xou {

double exit_residual(double b, const EigenSystem& es, const Costs& costs) {
    return 1.0 - (1.0 - costs.c_s * std::exp(-b)) * es.at(b).dlog_F;
}

ExitSolution solve_exit(const EigenSystem& es, const Costs& costs, const RootOptions& opts) {
    costs.validate();
    const ModelLandmarks lm = landmarks(es.params(), costs);
    const double anchor = std::max(lm.x_s, std::log(costs.c_s));
    auto f = [&](double b) { return exit_residual(b, es, costs); };
    const Bracket br = expand_bracket(f, anchor, +1, 0.25, 200, "b_star");
    const RootResult rr = bisect(f, br.lo, br.hi, opts, "b_star");

    ExitSolution out{};
    out.b_star = rr.x;
    out.k = std::exp(std::log(reward_sell(rr.x, costs)) - es.at(rr.x).log_F);
    out.diag = {rr.residual, rr.bracket_width, rr.iterations};
    return out;
}

double value_exit(double x, const ExitSolution& exit, const EigenSystem& es, const Costs& costs) {
    if (x >= exit.b_star) return reward_sell(x, costs);
    return exit.k * es.F(x);
}

double value_exit_derivative(double x, const ExitSolution& exit, const EigenSystem& es, const Costs& costs) {
    (void)costs;
    if (x > exit.b_star) return std::exp(x);
    const auto& pt = es.at(x);
    return exit.k * std::exp(pt.log_F) * pt.dlog_F;
}

double value_exit_second(double x, const ExitSolution& exit, const EigenSystem& es, const Costs& costs) {
    (void)costs;
    if (x > exit.b_star) return std::exp(x);
    const auto& pt = es.at(x);
    return exit.k * std::exp(pt.log_F) * pt.d2_F;
}

double entry_residual_G(double d, const ExitSolution& exit, const EigenSystem& es, const Costs& costs) {
    const double V = value_exit(d, exit, es, costs);
    const double dV = value_exit_derivative(d, exit, es, costs);
    return (dV - std::exp(d)) - es.at(d).dlog_G * (V - reward_buy(d, costs));
}

double entry_residual_F(double a, const ExitSolution& exit, const EigenSystem& es, const Costs& costs) {
    const double V = value_exit(a, exit, es, costs);
    const double dV = value_exit_derivative(a, exit, es, costs);
    return (dV - std::exp(a)) - es.at(a).dlog_F * (V - reward_buy(a, costs));
}

DoubleStoppingSolution solve_entry(const EigenSystem& es, const Costs& costs, const ExitSolution& exit,
                                   const RootOptions& opts) {
    const ModelLandmarks lm = landmarks(es.params(), costs);
    const TwoRoots* roots = two_roots(lm);
    if (roots == nullptr) {
        throw TrivialProblem("f_b has fewer than two roots; entry is never optimal");
    }

    auto fd = [&](double d) { return entry_residual_G(d, exit, es, costs); };
    RootResult rd{};
    try {
        rd = bisect(fd, roots->x_b1, roots->x_b2, opts, "d_star");
    } catch (const SolverFailure&) {
        // No smooth-fit point: trivial when V - h_b never turns positive.
        const int n = 400;
        double best = -std::numeric_limits<double>::infinity();
        for (int i = 0; i <= n; ++i) {
            const double x = roots->x_b1 + (roots->x_b2 - roots->x_b1) * i / n;
            best = std::max(best, value_exit(x, exit, es, costs) - reward_buy(x, costs));
        }
        if (!(best > 0.0)) {
            throw TrivialProblem("V - h_b is not positive on (x_b1, x_b2); the investor never buys");
        }
        throw;
    }
    const double gap = value_exit(rd.x, exit, es, costs) - reward_buy(rd.x, costs);
    if (!(gap > 0.0)) {
        throw TrivialProblem("V - h_b is not positive at the entry candidate; the investor never buys");
    }

    auto fa = [&](double a) { return entry_residual_F(a, exit, es, costs); };
    const RootResult ra = bisect(fa, roots->x_b1, rd.x, opts, "a_star");

    DoubleStoppingSolution sol{};
    sol.b_star = exit.b_star;
    sol.k = exit.k;
    sol.b_diag = exit.diag;
    sol.d_star = rd.x;
    sol.a_star = ra.x;
    sol.d_diag = {rd.residual / reward_buy(rd.x, costs), rd.bracket_width, rd.iterations};
    sol.a_diag = {ra.residual / reward_buy(ra.x, costs), ra.bracket_width, ra.iterations};
    sol.P = exit.k - std::exp(std::log(reward_buy(ra.x, costs)) - es.at(ra.x).log_F);
    sol.Q = std::exp(std::log(gap) - es.at(rd.x).log_G);
    return sol;
}

DoubleStoppingSolution solve_double_stopping(const EigenSystem& es, const Costs& costs, const RootOptions& opts) {
    return solve_entry(es, costs, solve_exit(es, costs, opts), opts);
}

double value_entry(double x, const DoubleStoppingSolution& sol, const EigenSystem& es, const Costs& costs) {
    if (x < sol.a_star) return sol.P * es.F(x);
    if (x > sol.d_star) return sol.Q * es.G(x);
    return value_exit(x, sol.exit(), es, costs) - reward_buy(x, costs);
}

double value_entry_derivative(double x, const DoubleStoppingSolution& sol, const EigenSystem& es,
                              const Costs& costs) {
    const auto& pt = es.at(x);
    if (x < sol.a_star) return sol.P * std::exp(pt.log_F) * pt.dlog_F;
    if (x > sol.d_star) return sol.Q * std::exp(pt.log_G) * pt.dlog_G;
    return value_exit_derivative(x, sol.exit(), es, costs) - std::exp(x);
}

double strategy_value(double x, double a, double d, double b, const EigenSystem& es, const Costs& costs) {
    if (!(a <= d && d < b)) throw ValidationError("strategy thresholds must satisfy a <= d < b");
    const double log_Fb = es.at(b).log_F;
    auto sell_value = [&](double y) {
        if (y >= b) return reward_sell(y, costs);
        return reward_sell(b, costs) * std::exp(es.at(y).log_F - log_Fb);
    };
    auto entry_payoff = [&](double y) { return sell_value(y) - reward_buy(y, costs); };
    if (x >= a && x <= d) return entry_payoff(x);
    if (x > d) return std::exp(es.at(x).log_G - es.at(d).log_G) * entry_payoff(d);
    return std::exp(es.at(x).log_F - es.at(a).log_F) * entry_payoff(a);
}

}  // namespace xou
