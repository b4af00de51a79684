#pragma once

// Independent checks of solved thresholds: the psi-transform / concave
// majorant construction, grid versions of the structural properties of H and
// H-hat, and residuals of the variational inequalities.

#include <string>
#include <vector>

#include "xou/double_stopping.hpp"
#include "xou/eigen.hpp"
#include "xou/model.hpp"
#include "xou/switching.hpp"

namespace xou {

/// Uniform x-grid and its images under z = psi(x) = F/G. The transformed
/// rewards are H = h_s / G and H_hat = (V - h_b) / G. Values are long double
/// because z spans thousands of orders of magnitude on wide grids.
struct TransformGrid {
    std::vector<double> x;
    std::vector<long double> z;
    std::vector<long double> H;
    std::vector<long double> H_hat;

    double spacing() const { return x.size() > 1 ? x[1] - x[0] : 0.0; }
};

TransformGrid build_transforms(double x_lo, double x_hi, std::size_t n, const ExitSolution& exit,
                               const EigenSystem& es, const Costs& costs);

/// Smallest concave majorant on [0, inf) of the points (z_i, f_i) together
/// with the origin, evaluated at each z_i. To the right of the maximum it is
/// flat: any decreasing concave function eventually falls below a function
/// that decays slower than linearly, as H_hat does.
std::vector<long double> concave_majorant(const std::vector<long double>& z, const std::vector<long double>& f);

struct MajorantReport {
    std::vector<double> x;
    std::vector<double> V_majorant;
    std::vector<double> V_closed;
    std::vector<double> J_majorant;
    std::vector<double> J_closed;
    double max_rel_gap_V = 0.0;
    double max_rel_gap_J = 0.0;
    /// First hull vertex of H after the origin, mapped back to x.
    double exit_tangency_x = 0.0;
    /// Hull argmax of H_hat mapped back to x.
    double entry_peak_x = 0.0;
    double cell = 0.0;
    bool exit_tangency_ok = false;
    bool entry_peak_ok = false;
    /// W >= H everywhere and W == H exactly from the tangency point on.
    bool dominance_ok = false;
    bool pass = false;
};

MajorantReport concave_majorant_oracle(const TransformGrid& grid, const DoubleStoppingSolution& sol,
                                       const EigenSystem& es, const Costs& costs, double tolerance = 1e-4);

struct KinkCheck {
    std::string name;
    double x;
    double value_gap;  ///< scaled |f(x+) - f(x-)|
    double slope_gap;  ///< scaled |f'(x+) - f'(x-)|
    bool ok;
};

struct ResidualReport {
    std::vector<double> grid;
    std::vector<double> vi_J_residuals;  ///< NaN inside kink neighbourhoods
    std::vector<double> vi_V_residuals;
    double worst = 0.0;    ///< most negative min-term
    double worst_x = 0.0;
    double max_abs = 0.0;  ///< largest |min-term|
    std::vector<KinkCheck> kinks;
    bool j_identically_zero_checked = false;
    bool j_identically_zero = false;
    double tolerance = 0.0;
    bool pass = false;
};

struct GridSpec {
    double x_lo;
    double x_hi;
    std::size_t n = 4000;
};

/// Residuals of
///   min{ (r - L) J, J - (V - h_b) } = 0
///   min{ (r - L) V, V - (J + h_s) } = 0
/// scaled by e^x + c_b + c_s. Grid points within two cells of a threshold
/// are skipped; continuity of value and slope is checked there instead.
ResidualReport vi_residuals(const SwitchingSolution& sol, const EigenSystem& es, const Costs& costs,
                            const GridSpec& grid, double tolerance = 1e-6);

/// Same for one round trip, where the exit inequality reads min{ (r - L) V, V - h_s } = 0.
ResidualReport vi_residuals(const DoubleStoppingSolution& sol, const EigenSystem& es, const Costs& costs,
                            const GridSpec& grid, double tolerance = 1e-6);

struct ClauseResult {
    std::string clause;
    bool passed;
    std::string detail;
};

struct LemmaReport {
    std::vector<ClauseResult> clauses;
    bool pass() const;
};

/// Grid assertions for the shape of H, and of H_hat when `entry` is given.
LemmaReport lemma_property_suite(const ExitSolution& exit, const DoubleStoppingSolution* entry,
                                 const EigenSystem& es, const Costs& costs, std::size_t n = 800);

}  // namespace xou
