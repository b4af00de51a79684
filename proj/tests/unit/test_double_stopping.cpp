#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "xou/double_stopping.hpp"
#include "xou/errors.hpp"

using namespace xou;

namespace {

// Argmax of f on a uniform grid of n cells over [lo, hi].
template <class Fn>
double grid_argmax(Fn f, double lo, double hi, int n) {
    double best = -1e300;
    double arg = lo;
    for (int i = 0; i <= n; ++i) {
        const double x = lo + (hi - lo) * i / n;
        const double v = f(x);
        if (v > best) {
            best = v;
            arg = x;
        }
    }
    return arg;
}

struct Base {
    ModelParams p = fx::base();
    Costs c = fx::base_costs();
    EigenSystem es{p};
    DoubleStoppingSolution sol = solve_double_stopping(es, c);
};

}  // namespace

TEST_CASE_FIXTURE(Base, "exit level maximises h_s(b) / F(b)") {
    // V(x) = sup_b h_s(b) F(x) / F(b) for x below the exit level.
    const double lo = std::log(c.c_s) + 1e-3;
    auto ratio = [&](double b) { return std::log(reward_sell(b, c)) - es.at(b).log_F; };
    const double step = (p.theta + 3.0 - lo) / 40000;
    CHECK(std::fabs(grid_argmax(ratio, lo, p.theta + 3.0, 40000) - sol.b_star) < 2 * step);
    CHECK(std::fabs(exit_residual(sol.b_star, es, c)) < 1e-10);
}

TEST_CASE_FIXTURE(Base, "entry levels maximise (V - h_b) / G and (V - h_b) / F") {
    const ExitSolution ex = sol.exit();
    auto gap = [&](double x) { return value_exit(x, ex, es, c) - reward_buy(x, c); };
    const double d_grid =
        grid_argmax([&](double d) { return gap(d) > 0 ? std::log(gap(d)) - es.at(d).log_G : -1e300; }, -2.0,
                    sol.b_star, 20000);
    CHECK(d_grid == doctest::Approx(sol.d_star).epsilon(5e-4));
    const double a_grid = grid_argmax(
        [&](double a) { return gap(a) > 0 ? std::log(gap(a)) - es.at(a).log_F : -1e300; }, sol.a_star - 1.0,
        sol.d_star, 20000);
    CHECK(a_grid == doctest::Approx(sol.a_star).epsilon(5e-4));
}

TEST_CASE_FIXTURE(Base, "no threshold pair beats the solved one") {
    for (double x : {-9.5, -5.0, 0.0, 0.7, 1.0, 1.5}) {
        const double j = value_entry(x, sol, es, c);
        CHECK(strategy_value(x, sol.a_star, sol.d_star, sol.b_star, es, c) == doctest::Approx(j).epsilon(1e-9));
        for (double da : {-0.3, 0.3}) {
            for (double dd : {-0.05, 0.05}) {
                const double a = sol.a_star + da;
                const double d = sol.d_star + dd;
                CHECK(strategy_value(x, a, d, sol.b_star, es, c) <= j + 1e-12);
            }
        }
    }
}

TEST_CASE_FIXTURE(Base, "value functions are C1 at the thresholds") {
    const ExitSolution ex = sol.exit();
    for (double t : {sol.a_star, sol.d_star}) {
        const double h = 1e-6;
        const double left = (value_entry(t - h, sol, es, c) - value_entry(t - 2 * h, sol, es, c)) / h;
        const double right = (value_entry(t + 2 * h, sol, es, c) - value_entry(t + h, sol, es, c)) / h;
        CHECK(left == doctest::Approx(right).epsilon(1e-4));
        CHECK(value_entry_derivative(t, sol, es, c) == doctest::Approx(left).epsilon(1e-4));
    }
    CHECK(value_exit_derivative(sol.b_star, ex, es, c) == doctest::Approx(std::exp(sol.b_star)).epsilon(1e-9));
    CHECK(value_exit(sol.b_star, ex, es, c) == doctest::Approx(reward_sell(sol.b_star, c)).epsilon(1e-12));
}

TEST_CASE_FIXTURE(Base, "ordering of the thresholds") {
    const ModelLandmarks lm = landmarks(p, c);
    CHECK(sol.a_star < sol.d_star);
    CHECK(sol.d_star < sol.b_star);
    CHECK(sol.b_star > lm.x_s);
    CHECK(sol.P > 0.0);
    CHECK(sol.Q > 0.0);
}

TEST_CASE("prohibitive entry cost is a trivial problem") {
    const EigenSystem es(fx::base());
    CHECK_THROWS_AS(solve_double_stopping(es, fx::no_entry_costs()), TrivialProblem);
    CHECK_THROWS_AS(solve_double_stopping(es, {1e6, 0.02}), TrivialProblem);
}
