#include "xou/verification.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "xou/errors.hpp"
#include "xou/roots.hpp"

namespace xou {

namespace {

using ld = long double;

std::vector<double> uniform_grid(double lo, double hi, std::size_t n) {
    if (!(lo < hi)) throw ValidationError("grid requires x_lo < x_hi");
    if (n < 3) throw ValidationError("grid requires at least 3 points");
    std::vector<double> x(n);
    const double h = (hi - lo) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) x[i] = lo + h * static_cast<double>(i);
    x.back() = hi;
    return x;
}

struct Pt {
    ld z;
    ld f;
};

// > 0 when o -> a -> b turns left.
ld cross(const Pt& o, const Pt& a, const Pt& b) { return (a.z - o.z) * (b.f - o.f) - (a.f - o.f) * (b.z - o.z); }

// Hull vertex indices into pts (monotone chain, upper part).
std::vector<std::size_t> upper_hull(const std::vector<Pt>& pts) {
    std::vector<std::size_t> h;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        while (h.size() >= 2 && cross(pts[h[h.size() - 2]], pts[h.back()], pts[i]) >= 0) h.pop_back();
        h.push_back(i);
    }
    return h;
}

std::string fmt(long double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

}  // namespace

TransformGrid build_transforms(double x_lo, double x_hi, std::size_t n, const ExitSolution& exit,
                               const EigenSystem& es, const Costs& costs) {
    TransformGrid g;
    g.x = uniform_grid(x_lo, x_hi, n);
    g.z.resize(n);
    g.H.resize(n);
    g.H_hat.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = g.x[i];
        const auto& pt = es.at(x);
        const ld inv_G = std::exp(-static_cast<ld>(pt.log_G));
        g.z[i] = std::exp(static_cast<ld>(pt.log_F) - static_cast<ld>(pt.log_G));
        g.H[i] = static_cast<ld>(reward_sell(x, costs)) * inv_G;
        const double v = value_exit(x, exit, es, costs);
        g.H_hat[i] = (static_cast<ld>(v) - static_cast<ld>(reward_buy(x, costs))) * inv_G;
    }
    for (std::size_t i = 1; i < n; ++i) {
        if (!(g.z[i] > g.z[i - 1])) throw NumericFailure("psi grid is not strictly increasing", 0.0);
    }
    return g;
}

std::vector<long double> concave_majorant(const std::vector<long double>& z, const std::vector<long double>& f) {
    std::vector<Pt> pts;
    pts.reserve(z.size() + 1);
    pts.push_back({0.0L, 0.0L});
    for (std::size_t i = 0; i < z.size(); ++i) pts.push_back({z[i], f[i]});
    std::vector<std::size_t> hull = upper_hull(pts);

    // Cut the hull at its highest vertex; beyond that the majorant is flat.
    std::size_t top = 0;
    for (std::size_t k = 1; k < hull.size(); ++k) {
        if (pts[hull[k]].f > pts[hull[top]].f) top = k;
    }
    hull.resize(top + 1);
    const ld peak = pts[hull.back()].f;

    std::vector<long double> w(z.size());
    std::size_t k = 0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        const ld zi = z[i];
        if (zi >= pts[hull.back()].z) {
            w[i] = peak;
            continue;
        }
        while (k + 1 < hull.size() && pts[hull[k + 1]].z < zi) ++k;
        const Pt& a = pts[hull[k]];
        const Pt& b = pts[hull[k + 1]];
        if (zi == b.z) {
            w[i] = b.f;
        } else {
            const ld t = (zi - a.z) / (b.z - a.z);
            w[i] = a.f + t * (b.f - a.f);
        }
    }
    return w;
}

MajorantReport concave_majorant_oracle(const TransformGrid& grid, const DoubleStoppingSolution& sol,
                                       const EigenSystem& es, const Costs& costs, double tolerance) {
    MajorantReport rep;
    const std::size_t n = grid.x.size();
    const std::vector<ld> W = concave_majorant(grid.z, grid.H);
    const std::vector<ld> W_hat = concave_majorant(grid.z, grid.H_hat);
    rep.x = grid.x;
    rep.cell = grid.spacing();
    rep.V_majorant.resize(n);
    rep.V_closed.resize(n);
    rep.J_majorant.resize(n);
    rep.J_closed.resize(n);
    const ExitSolution exit = sol.exit();
    for (std::size_t i = 0; i < n; ++i) {
        const double x = grid.x[i];
        const ld G = std::exp(static_cast<ld>(es.at(x).log_G));
        rep.V_majorant[i] = static_cast<double>(G * W[i]);
        rep.J_majorant[i] = static_cast<double>(G * W_hat[i]);
        rep.V_closed[i] = value_exit(x, exit, es, costs);
        rep.J_closed[i] = value_entry(x, sol, es, costs);
        rep.max_rel_gap_V = std::max(rep.max_rel_gap_V,
                                     std::fabs(rep.V_majorant[i] - rep.V_closed[i]) / std::fabs(rep.V_closed[i]));
        rep.max_rel_gap_J = std::max(rep.max_rel_gap_J,
                                     std::fabs(rep.J_majorant[i] - rep.J_closed[i]) / std::fabs(rep.J_closed[i]));
    }

    // Tangency of W with H: first grid index where the majorant touches H.
    const ld touch_tol = 1e-12L;
    std::size_t touch = n;
    for (std::size_t i = 0; i < n; ++i) {
        if (grid.H[i] > 0 && W[i] - grid.H[i] <= touch_tol * std::fabs(grid.H[i])) {
            touch = i;
            break;
        }
    }
    rep.exit_tangency_x = touch < n ? grid.x[touch] : std::numeric_limits<double>::quiet_NaN();
    rep.exit_tangency_ok = touch < n && std::fabs(rep.exit_tangency_x - sol.b_star) <= rep.cell;

    bool dominance = touch < n;
    for (std::size_t i = 0; i < n && dominance; ++i) {
        const ld gap = W[i] - grid.H[i];
        const ld scale = std::fabs(grid.H[i]);
        if (gap < -touch_tol * scale) dominance = false;
        if (i >= touch && gap > touch_tol * scale) dominance = false;
        if (i < touch && !(gap > 0)) dominance = false;
    }
    rep.dominance_ok = dominance;

    std::size_t peak = 0;
    for (std::size_t i = 1; i < n; ++i) {
        if (grid.H_hat[i] > grid.H_hat[peak]) peak = i;
    }
    rep.entry_peak_x = grid.x[peak];
    rep.entry_peak_ok = std::fabs(rep.entry_peak_x - sol.d_star) <= rep.cell;

    rep.pass = rep.max_rel_gap_V <= tolerance && rep.max_rel_gap_J <= tolerance && rep.exit_tangency_ok &&
               rep.entry_peak_ok && rep.dominance_ok;
    return rep;
}

namespace {

// f(x, order) for order 0..2.
using Piecewise = std::function<double(double, int)>;

struct Kink {
    const char* name;
    double x;
    Piecewise f;
};

double generator_gap(const Piecewise& f, double x, const ModelParams& p) {
    const double v = f(x, 0);
    const double d1 = f(x, 1);
    const double d2 = f(x, 2);
    return p.r * v - (0.5 * p.sigma * p.sigma * d2 + p.mu * (p.theta - x) * d1);
}

double local_scale(double x, const Costs& costs) { return std::exp(x) + costs.c_b + costs.c_s; }

ResidualReport vi_core(const Piecewise& J, const Piecewise& V, bool double_stopping, const std::vector<Kink>& kinks,
                       const EigenSystem& es, const Costs& costs, const GridSpec& spec, double tol) {
    ResidualReport rep;
    rep.tolerance = tol;
    rep.grid = uniform_grid(spec.x_lo, spec.x_hi, spec.n);
    const double h = rep.grid[1] - rep.grid[0];
    const ModelParams& p = es.params();
    const double nan = std::numeric_limits<double>::quiet_NaN();
    rep.vi_J_residuals.assign(spec.n, nan);
    rep.vi_V_residuals.assign(spec.n, nan);
    rep.worst = std::numeric_limits<double>::infinity();

    bool first = true;
    for (std::size_t i = 0; i < spec.n; ++i) {
        const double x = rep.grid[i];
        bool near_kink = false;
        for (const Kink& k : kinks) near_kink = near_kink || std::fabs(x - k.x) <= 2.0 * h * (1.0 + 1e-9);
        if (near_kink) continue;
        const double s = local_scale(x, costs);
        const double j = J(x, 0);
        const double v = V(x, 0);
        const double mj = std::min(generator_gap(J, x, p), j - (v - reward_buy(x, costs))) / s;
        const double exit_payoff = double_stopping ? reward_sell(x, costs) : j + reward_sell(x, costs);
        const double mv = std::min(generator_gap(V, x, p), v - exit_payoff) / s;
        rep.vi_J_residuals[i] = mj;
        rep.vi_V_residuals[i] = mv;
        for (double m : {mj, mv}) {
            if (first || m < rep.worst) {
                rep.worst = m;
                rep.worst_x = x;
                first = false;
            }
            rep.max_abs = std::max(rep.max_abs, std::fabs(m));
        }
    }
    if (first) rep.worst = 0.0;

    bool kinks_ok = true;
    for (const Kink& k : kinks) {
        const double lo = std::nextafter(k.x, -std::numeric_limits<double>::infinity());
        const double hi = std::nextafter(k.x, std::numeric_limits<double>::infinity());
        const double s = local_scale(k.x, costs);
        KinkCheck kc{k.name, k.x, std::fabs(k.f(hi, 0) - k.f(lo, 0)) / s, std::fabs(k.f(hi, 1) - k.f(lo, 1)) / s,
                     false};
        kc.ok = kc.value_gap <= tol && kc.slope_gap <= tol;
        kinks_ok = kinks_ok && kc.ok;
        rep.kinks.push_back(kc);
    }
    rep.pass = rep.worst >= -tol && rep.max_abs <= tol && kinks_ok;
    return rep;
}

}  // namespace

ResidualReport vi_residuals(const SwitchingSolution& sol, const EigenSystem& es, const Costs& costs,
                            const GridSpec& grid, double tolerance) {
    Piecewise J = [&](double x, int o) { return value_J_tilde(x, sol, es, costs, o); };
    Piecewise V = [&](double x, int o) { return value_V_tilde(x, sol, es, costs, o); };
    std::vector<Kink> kinks;
    if (sol.recurrent()) {
        const Recurrent& r = sol.rec();
        kinks = {{"J at a_tilde", r.a_tilde, J}, {"J at d_tilde", r.d_tilde, J}, {"V at b_tilde", r.b_tilde, V}};
    } else {
        kinks = {{"V at b_star", sol.no_entry().b_star, V}};
    }
    ResidualReport rep = vi_core(J, V, false, kinks, es, costs, grid, tolerance);
    if (!sol.recurrent()) {
        rep.j_identically_zero_checked = true;
        rep.j_identically_zero = true;
        for (double x : rep.grid) {
            for (int o = 0; o <= 2; ++o) rep.j_identically_zero = rep.j_identically_zero && J(x, o) == 0.0;
        }
        rep.pass = rep.pass && rep.j_identically_zero;
    }
    return rep;
}

ResidualReport vi_residuals(const DoubleStoppingSolution& sol, const EigenSystem& es, const Costs& costs,
                            const GridSpec& grid, double tolerance) {
    const ExitSolution exit = sol.exit();
    Piecewise V = [&](double x, int o) {
        if (o == 0) return value_exit(x, exit, es, costs);
        if (o == 1) return value_exit_derivative(x, exit, es, costs);
        return value_exit_second(x, exit, es, costs);
    };
    Piecewise J = [&](double x, int o) {
        if (x >= sol.a_star && x <= sol.d_star) {
            const double e = std::exp(x);
            return V(x, o) - (o == 0 ? e + costs.c_b : e);
        }
        const auto& pt = es.at(x);
        const bool left = x < sol.a_star;
        const double base = left ? sol.P * std::exp(pt.log_F) : sol.Q * std::exp(pt.log_G);
        if (o == 0) return base;
        if (o == 1) return base * (left ? pt.dlog_F : pt.dlog_G);
        return base * (left ? pt.d2_F : pt.d2_G);
    };
    std::vector<Kink> kinks = {{"J at a_star", sol.a_star, J}, {"J at d_star", sol.d_star, J},
                               {"V at b_star", sol.b_star, V}};
    return vi_core(J, V, true, kinks, es, costs, grid, tolerance);
}

bool LemmaReport::pass() const {
    return std::all_of(clauses.begin(), clauses.end(), [](const ClauseResult& c) { return c.passed; });
}

namespace {

// Divided second difference of f over z at i.
ld second_difference(const std::vector<ld>& z, const std::vector<ld>& f, std::size_t i) {
    const ld s1 = (f[i] - f[i - 1]) / (z[i] - z[i - 1]);
    const ld s2 = (f[i + 1] - f[i]) / (z[i + 1] - z[i]);
    return 2 * (s2 - s1) / (z[i + 1] - z[i - 1]);
}

// Rounding floor for the second difference, from a relative error `eps` in f.
ld second_difference_noise(const std::vector<ld>& z, const std::vector<ld>& f, std::size_t i, ld eps) {
    const ld mag = std::fabs(f[i - 1]) + 2 * std::fabs(f[i]) + std::fabs(f[i + 1]);
    const ld dz = std::min(z[i] - z[i - 1], z[i + 1] - z[i]);
    return 2 * eps * mag / (dz * (z[i + 1] - z[i - 1]));
}

enum class Transformed { H, H_hat };

// sign = +1 checks convexity, -1 concavity, of H or H_hat over psi((lo, hi))
// on a dedicated grid that stays 2% of the width away from both ends.
ClauseResult curvature_clause(const std::string& name, Transformed which, double lo, double hi, int sign,
                              const ExitSolution& exit, const EigenSystem& es, const Costs& costs,
                              std::size_t n = 201) {
    if (!(hi > lo)) return {name, false, "empty interval"};
    const double trim = 0.02 * (hi - lo);
    const TransformGrid g = build_transforms(lo + trim, hi - trim, n, exit, es, costs);
    const std::vector<ld>& f = which == Transformed::H ? g.H : g.H_hat;
    std::size_t bad = 0;
    double bad_x = 0.0;
    for (std::size_t i = 1; i + 1 < g.x.size(); ++i) {
        const ld d2 = second_difference(g.z, f, i);
        const ld noise = second_difference_noise(g.z, f, i, 1e-13L);
        if (sign * d2 < -noise) {
            if (bad == 0) bad_x = g.x[i];
            ++bad;
        }
    }
    std::string detail = std::to_string(n - 2) + " points on x in [" + fmt(lo + trim) + ", " + fmt(hi - trim) + "]";
    if (bad) detail += ", " + std::to_string(bad) + " violations, first at x=" + fmt(bad_x);
    return {name, bad == 0, detail};
}

// x with log psi(x) = target, by bisection on a bracket that contains it.
double invert_log_psi(double target, double lo, double hi, const EigenSystem& es) {
    auto f = [&](double x) { return es.log_psi(x) - target; };
    return bisect(f, lo, hi, RootOptions{1e-12, 200}, "psi inverse").x;
}

}  // namespace

LemmaReport lemma_property_suite(const ExitSolution& exit, const DoubleStoppingSolution* entry,
                                 const EigenSystem& es, const Costs& costs, std::size_t n) {
    LemmaReport rep;
    const ModelLandmarks lm = landmarks(es.params(), costs);
    const double ln_cs = std::log(costs.c_s);
    double x_lo = std::min(ln_cs, lm.x_s) - 3.0;
    if (entry) x_lo = std::min(x_lo, entry->a_star - 2.0);
    if (const TwoRoots* tr = two_roots(lm)) x_lo = std::min(x_lo, tr->x_b1 - 1.0);
    const double x_hi = exit.b_star + 2.0;
    const TransformGrid g = build_transforms(x_lo, x_hi, n, exit, es, costs);
    const std::size_t m = g.x.size();

    // H: value at the far left approximates H(0) = 0.
    {
        ld max_abs = 0;
        for (ld v : g.H) max_abs = std::max(max_abs, std::fabs(v));
        const bool ok = std::fabs(g.H.front()) <= 1e-12L * max_abs;
        rep.clauses.push_back({"H(0) = 0 limit", ok, "|H| at x=" + fmt(g.x.front()) + " is " +
                                                         fmt(std::fabs(g.H.front()))});
    }
    {
        std::size_t bad = 0;
        for (std::size_t i = 0; i < m; ++i) {
            const double x = g.x[i];
            if (x < ln_cs && !(g.H[i] < 0)) ++bad;
            if (x > ln_cs && !(g.H[i] > 0)) ++bad;
        }
        rep.clauses.push_back({"H < 0 below psi(ln c_s), H > 0 above", bad == 0, std::to_string(bad) + " violations"});
    }
    {
        std::size_t bad = 0;
        for (std::size_t i = 1; i < m; ++i) {
            if (g.x[i - 1] >= ln_cs && !(g.H[i] > g.H[i - 1])) ++bad;
        }
        rep.clauses.push_back({"H strictly increasing above psi(ln c_s)", bad == 0, std::to_string(bad) + " violations"});
    }
    {
        // Tail surrogate for H' -> 0: three points with psi ratios of 10.
        const double x1 = x_hi;
        const double l1 = es.log_psi(x1);
        const double x2 = invert_log_psi(l1 + std::log(10.0), x1, x1 + 20.0, es);
        const double x3 = invert_log_psi(l1 + 2.0 * std::log(10.0), x2, x2 + 20.0, es);
        auto Hx = [&](double x) { return static_cast<ld>(reward_sell(x, costs)) * std::exp(-static_cast<ld>(es.at(x).log_G)); };
        auto Zx = [&](double x) { return std::exp(static_cast<ld>(es.log_psi(x))); };
        const ld s12 = (Hx(x2) - Hx(x1)) / (Zx(x2) - Zx(x1));
        const ld s23 = (Hx(x3) - Hx(x2)) / (Zx(x3) - Zx(x2));
        const bool ok = s12 > 0 && s23 > 0 && s23 < s12;
        rep.clauses.push_back({"H' decreases toward 0 in the tail (three-point surrogate)", ok,
                               "slopes " + fmt(s12) + " then " + fmt(s23)});
    }
    rep.clauses.push_back(
        curvature_clause("H convex on (0, psi(x_s))", Transformed::H, x_lo, lm.x_s, +1, exit, es, costs));
    rep.clauses.push_back(
        curvature_clause("H concave on (psi(x_s), inf)", Transformed::H, lm.x_s, x_hi, -1, exit, es, costs));

    if (!entry) return rep;
    const TwoRoots* tr = two_roots(lm);
    {
        ld max_abs = 0;
        for (ld v : g.H_hat) max_abs = std::max(max_abs, std::fabs(v));
        const bool ok = std::fabs(g.H_hat.front()) <= 1e-12L * max_abs;
        rep.clauses.push_back({"H_hat(0) = 0 limit", ok, "|H_hat| at x=" + fmt(g.x.front()) + " is " +
                                                             fmt(std::fabs(g.H_hat.front()))});
    }
    {
        std::size_t bad = 0;
        for (std::size_t i = 0; i < m; ++i) {
            if (g.x[i] >= exit.b_star && !(g.H_hat[i] < 0)) ++bad;
        }
        const bool somewhere_positive = std::any_of(g.H_hat.begin(), g.H_hat.end(), [](ld v) { return v > 0; });
        rep.clauses.push_back({"H_hat < 0 on [psi(b*), inf) and positive somewhere", bad == 0 && somewhere_positive,
                               std::to_string(bad) + " violations"});
    }
    {
        // V decays only like |x|^(-r/mu) to the left, so the negative region near
        // z = 0 can sit very far out; search geometrically.
        auto h_hat = [&](double x) { return value_exit(x, exit, es, costs) - reward_buy(x, costs); };
        double x = std::min(es.params().theta, 0.0) - 1.0;
        bool found = false;
        for (int i = 0; i < 400 && std::isfinite(x); ++i) {
            if (h_hat(x) < 0.0 && h_hat(2.0 * x) < 0.0) {
                found = true;
                break;
            }
            x *= 2.0;
        }
        rep.clauses.push_back({"H_hat < 0 near z = 0", found,
                               found ? "negative from x=" + fmt(x) + " leftward" : "no negative value found"});
    }
    {
        std::size_t bad = 0;
        for (std::size_t i = 1; i < m; ++i) {
            if (g.x[i - 1] >= exit.b_star && !(g.H_hat[i] < g.H_hat[i - 1])) ++bad;
        }
        rep.clauses.push_back({"H_hat strictly decreasing on [psi(b*), inf)", bad == 0,
                               std::to_string(bad) + " violations"});
    }
    rep.clauses.push_back(curvature_clause("H_hat convex on (psi(x_s), inf)", Transformed::H_hat, lm.x_s, x_hi, +1,
                                           exit, es, costs));
    if (tr) {
        rep.clauses.push_back(curvature_clause("H_hat concave on (psi(x_b1), psi(x_b2))", Transformed::H_hat,
                                               tr->x_b1, tr->x_b2, -1, exit, es, costs));
        rep.clauses.push_back(curvature_clause("H_hat convex on (psi(x_b2), psi(x_s))", Transformed::H_hat, tr->x_b2,
                                               lm.x_s, +1, exit, es, costs));
        rep.clauses.push_back(curvature_clause("H_hat convex on (0, psi(x_b1))", Transformed::H_hat, tr->x_b1 - 3.0,
                                               tr->x_b1, +1, exit, es, costs));
        std::size_t peak = 0;
        for (std::size_t i = 1; i < m; ++i) {
            if (g.H_hat[i] > g.H_hat[peak]) peak = i;
        }
        const bool ok = g.x[peak] > tr->x_b1 && g.x[peak] < tr->x_b2;
        rep.clauses.push_back({"argmax of H_hat in (psi(x_b1), psi(x_b2))", ok, "argmax at x=" + fmt(g.x[peak])});
    } else {
        rep.clauses.push_back({"f_b has two roots", false, "entry solution given but f_b lacks two roots"});
    }
    return rep;
}

}  // namespace xou
