#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "xou/errors.hpp"
#include "xou/model.hpp"

using namespace xou;

namespace {

// (L - r) h by finite differences, divided by e^x.
template <class H>
double generator_over_exp(H h, double x, const ModelParams& p) {
    const double d1 = fx::diff(h, x, 1e-4);
    const double d2 = (h(x + 1e-4) - 2.0 * h(x) + h(x - 1e-4)) / 1e-8;
    return (0.5 * p.sigma * p.sigma * d2 + p.mu * (p.theta - x) * d1 - p.r * h(x)) / std::exp(x);
}

}  // namespace

TEST_CASE("f_s and f_b are (L - r) h / e^x") {
    const auto p = fx::base();
    const auto c = fx::base_costs();
    for (double x : {-3.0, -0.5, 0.3, 1.0, 1.7}) {
        const double fs = generator_over_exp([&](double y) { return reward_sell(y, c); }, x, p);
        const double fb = generator_over_exp([&](double y) { return reward_buy(y, c); }, x, p);
        CHECK(f_sell(x, p, c) == doctest::Approx(fs).epsilon(1e-5));
        CHECK(f_buy(x, p, c) == doctest::Approx(fb).epsilon(1e-5));
    }
}

TEST_CASE("landmarks are roots and the f_b maximiser") {
    const auto p = fx::base();
    const auto c = fx::base_costs();
    const ModelLandmarks lm = landmarks(p, c);
    CHECK(std::fabs(f_sell(lm.x_s, p, c)) < 1e-10);
    const TwoRoots* t = two_roots(lm);
    REQUIRE(t != nullptr);
    CHECK(t->x_b1 < lm.x_crit);
    CHECK(lm.x_crit < t->x_b2);
    CHECK(std::fabs(f_buy(t->x_b1, p, c)) < 1e-10);
    CHECK(std::fabs(f_buy(t->x_b2, p, c)) < 1e-10);
    // x_crit maximises f_b on a fine grid.
    double best = -1e300;
    double arg = 0.0;
    for (int i = 0; i <= 20000; ++i) {
        const double x = -10.0 + 8.0 * i / 20000.0;
        if (f_buy(x, p, c) > best) {
            best = f_buy(x, p, c);
            arg = x;
        }
    }
    CHECK(arg == doctest::Approx(lm.x_crit).epsilon(1e-3));
    CHECK(f_buy(lm.x_crit + 0.01, p, c) < f_buy(lm.x_crit, p, c));
}

TEST_CASE("f_b root cases") {
    const auto p = fx::base();
    // Enormous entry cost pushes the f_b maximum below zero.
    const ModelLandmarks none = landmarks(p, {1e6, 0.02});
    CHECK(std::holds_alternative<NoRoot>(none.fb_roots));
}

TEST_CASE("invalid inputs are rejected") {
    CHECK_THROWS_AS((ModelParams{0.0, 1.0, 0.2, 0.05}.validate()), ValidationError);
    CHECK_THROWS_AS((ModelParams{0.8, 1.0, -0.2, 0.05}.validate()), ValidationError);
    CHECK_THROWS_AS((ModelParams{0.8, 1.0, 0.2, 0.0}.validate()), ValidationError);
    CHECK_THROWS_AS((ModelParams{0.8, NAN, 0.2, 0.05}.validate()), ValidationError);
    CHECK_THROWS_AS((Costs{0.0, 0.02}.validate()), ValidationError);
    CHECK_THROWS_AS((Costs{0.02, -1.0}.validate()), ValidationError);
}
