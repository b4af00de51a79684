#include <doctest.h>

#include <cmath>
#include <cstring>

#include "fixtures.hpp"
#include "xou/switching.hpp"

using namespace xou;

namespace {

struct Base {
    ModelParams p = fx::base();
    Costs c = fx::base_costs();
    EigenSystem es{p};
    SwitchingSolution sw = solve_switching(es, c);
};

}  // namespace

TEST_CASE_FIXTURE(Base, "integral functionals: closed form against quadrature") {
    for (double x : {-2.0, 0.0, 0.8, 1.2}) {
        for (Reward h : {Reward::Sell, Reward::Buy}) {
            CHECK(lower_integral(h, x, es, c) == doctest::Approx(lower_integral_quadrature(h, x, es, c)).epsilon(1e-7));
            CHECK(upper_integral(h, x, es, c) == doctest::Approx(upper_integral_quadrature(h, x, es, c)).epsilon(1e-7));
        }
    }
}

TEST_CASE_FIXTURE(Base, "base case is recurrent and satisfies its defining equations") {
    REQUIRE(sw.recurrent());
    CHECK(std::strcmp(theorem_label(sw.report.chosen), "4") == 0);
    const Recurrent& r = sw.rec();
    CHECK(std::fabs(r.residual_qF) < 1e-9);
    CHECK(std::fabs(r.residual_qG) < 1e-9);
    CHECK(std::fabs(q_F(r.d_tilde, r.b_tilde, es, c)) / std::exp(r.b_tilde) < 1e-8);
    CHECK(std::fabs(q_G(r.d_tilde, r.b_tilde, es, c)) / std::exp(r.b_tilde) < 1e-8);
}

TEST_CASE_FIXTURE(Base, "structural invariants against the one-round-trip problem") {
    REQUIRE(sw.recurrent());
    const Recurrent& r = sw.rec();
    const DoubleStoppingSolution ds = solve_double_stopping(es, c);
    const ModelLandmarks lm = landmarks(p, c);
    const TwoRoots* t = two_roots(lm);
    REQUIRE(t != nullptr);
    CHECK(ds.d_star < r.d_tilde);
    CHECK(r.b_tilde < ds.b_star);
    CHECK(std::fabs(r.a_tilde - ds.a_star) < 1e-8);
    CHECK(r.b_tilde > lm.x_s);
    CHECK(r.d_tilde > t->x_b1);
    CHECK(r.d_tilde < t->x_b2);
    CHECK(std::fabs(beta(r.a_tilde, es, c) - ds.b_star) < 1e-6);
    // Trading forever is worth at least one round trip.
    for (double x : {-9.5, -3.0, 0.5, 0.9, 1.3}) {
        CHECK(value_J_tilde(x, sw, es, c) >= value_entry(x, ds, es, c) - 1e-12);
    }
}

TEST_CASE_FIXTURE(Base, "threshold_strategy reproduces the optimal coefficients") {
    const Recurrent& r = sw.rec();
    const Recurrent t = threshold_strategy(r.a_tilde, r.d_tilde, r.b_tilde, es, c);
    CHECK(t.K_t == doctest::Approx(r.K_t).epsilon(1e-9));
    CHECK(t.Q_t == doctest::Approx(r.Q_t).epsilon(1e-9));
    CHECK(t.P_t == doctest::Approx(r.P_t).epsilon(1e-9));
}

TEST_CASE_FIXTURE(Base, "moving any threshold lowers the value") {
    const Recurrent& r = sw.rec();
    for (auto [da, dd, db] : {std::tuple{0.0, 0.03, 0.0}, std::tuple{0.0, -0.03, 0.0}, std::tuple{0.0, 0.0, 0.03},
                              std::tuple{0.0, 0.0, -0.03}, std::tuple{0.5, 0.0, 0.0}}) {
        SwitchingSolution alt = sw;
        alt.regime = threshold_strategy(r.a_tilde + da, r.d_tilde + dd, r.b_tilde + db, es, c);
        // The coefficient formulas of the two routes agree to about 1e-11.
        for (double x : {-10.0, -8.7, -3.0, 0.5, 1.0}) {
            const double j = value_J_tilde(x, sw, es, c);
            const double v = value_V_tilde(x, sw, es, c);
            CHECK(value_J_tilde(x, alt, es, c) <= j + 1e-9 * std::fabs(j));
            CHECK(value_V_tilde(x, alt, es, c) <= v + 1e-9 * std::fabs(v));
        }
    }
}

TEST_CASE_FIXTURE(Base, "derivatives of J and V match finite differences") {
    for (double x : {-5.0, 0.3, 0.95, 1.2}) {
        auto J = [&](double y) { return value_J_tilde(y, sw, es, c); };
        auto V = [&](double y) { return value_V_tilde(y, sw, es, c); };
        CHECK(value_J_tilde(x, sw, es, c, 1) == doctest::Approx(fx::diff(J, x)).epsilon(1e-6));
        CHECK(value_V_tilde(x, sw, es, c, 1) == doctest::Approx(fx::diff(V, x)).epsilon(1e-6));
        auto dJ = [&](double y) { return value_J_tilde(y, sw, es, c, 1); };
        CHECK(value_J_tilde(x, sw, es, c, 2) == doctest::Approx(fx::diff(dJ, x)).epsilon(1e-5));
    }
}

TEST_CASE("prohibitive entry cost: never enter") {
    const EigenSystem es(fx::base());
    const Costs c = fx::no_entry_costs();
    const SwitchingSolution sw = solve_switching(es, c);
    CHECK_FALSE(sw.recurrent());
    for (double x : {-2.0, 0.0, 1.0, 2.0}) CHECK(value_J_tilde(x, sw, es, c) == 0.0);
    CHECK(sw.no_entry().b_star == doctest::Approx(solve_exit(es, c).b_star));

    const CaseReport none = classify(es, {1e6, 0.02});
    CHECK(none.chosen == Theorem::NoRootOrSingle);
}
