#include "xou/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "xou/errors.hpp"

namespace xou {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_number(const std::string& field, std::size_t line, const char* what) {
    const std::string t = trim(field);
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(t, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (t.empty() || used != t.size() || !std::isfinite(v)) {
        throw ValidationError("price CSV line " + std::to_string(line) + ": " + what + " '" + t + "' is not a number");
    }
    return v;
}

}  // namespace

PriceSeries read_price_csv(std::istream& in) {
    PriceSeries s;
    std::string line;
    std::size_t line_no = 0;
    bool header = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        if (header) {
            header = false;
            continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos) {
            throw ValidationError("price CSV line " + std::to_string(line_no) + ": expected 'timestamp,price'");
        }
        const double t = parse_number(line.substr(0, comma), line_no, "timestamp");
        const double p = parse_number(line.substr(comma + 1), line_no, "price");
        if (!(p > 0.0)) {
            throw ValidationError("price CSV line " + std::to_string(line_no) + ": price must be positive");
        }
        if (!s.time.empty() && !(t > s.time.back())) {
            throw ValidationError("price CSV line " + std::to_string(line_no) + ": timestamps must increase");
        }
        s.time.push_back(t);
        s.price.push_back(p);
    }
    if (header) throw ValidationError("price CSV is empty");
    return s;
}

PriceSeries read_price_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open price CSV '" + path + "'");
    return read_price_csv(in);
}

CalibrationResult calibrate(const PriceSeries& series, double dt) {
    const std::size_t n = series.price.size();
    if (series.time.size() != n) throw ValidationError("timestamp and price columns differ in length");
    if (n < kMinObservations) {
        throw ValidationError("calibration needs at least " + std::to_string(kMinObservations) + " observations, got " +
                              std::to_string(n));
    }
    const double step = (series.time.back() - series.time.front()) / static_cast<double>(n - 1);
    for (std::size_t i = 1; i < n; ++i) {
        const double d = series.time[i] - series.time[i - 1];
        if (std::fabs(d - step) > 1e-6 * std::fabs(step)) {
            throw ValidationError("timestamps are not uniformly spaced (row " + std::to_string(i + 1) + ")");
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(series.price[i] > 0.0)) throw ValidationError("prices must be positive");
        x[i] = std::log(series.price[i]);
    }
    return calibrate_log_prices(x, dt > 0.0 ? dt : step);
}

CalibrationResult calibrate_log_prices(const std::vector<double>& x, double dt) {
    const std::size_t n_obs = x.size();
    if (n_obs < kMinObservations) {
        throw ValidationError("calibration needs at least " + std::to_string(kMinObservations) + " observations, got " +
                              std::to_string(n_obs));
    }
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("dt must be positive");

    const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
    if (!(*hi - *lo > 1e-12 * std::max(1.0, std::fabs(*hi)))) {
        throw ValidationError("degenerate price series: zero variance");
    }

    // Regress x[k+1] on x[k], centred for accuracy.
    const std::size_t m = n_obs - 1;
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        mx += x[k];
        my += x[k + 1];
    }
    mx /= static_cast<double>(m);
    my /= static_cast<double>(m);
    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        const double dx = x[k] - mx;
        const double dy = x[k + 1] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (!(sxx > 0.0) || !(syy > 0.0)) throw ValidationError("degenerate price series: zero variance");

    const double phi = sxy / sxx;
    const double a = my - phi * mx;
    if (!(phi > 0.0 && phi < 1.0)) {
        throw ValidationError("fitted AR(1) slope " + std::to_string(phi) + " is outside (0, 1); no mean reversion");
    }
    double rss = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        const double e = x[k + 1] - a - phi * x[k];
        rss += e * e;
    }
    const double md = static_cast<double>(m);
    const double s2 = rss / md;  // conditional MLE
    if (!(s2 > 0.0)) throw ValidationError("degenerate price series: zero residual variance");

    CalibrationResult res{};
    res.dt = dt;
    res.n_obs = n_obs;
    res.phi = phi;
    res.mu = -std::log(phi) / dt;
    res.theta = a / (1.0 - phi);
    const double one_m_phi2 = 1.0 - phi * phi;
    const double sigma2 = 2.0 * res.mu * s2 / one_m_phi2;
    res.sigma = std::sqrt(sigma2);
    res.log_likelihood = -0.5 * md * (std::log(2.0 * std::numbers::pi * s2) + 1.0);

    // Delta method. (a, phi) has covariance s2 (X'X)^-1; s2 is asymptotically
    // independent with variance 2 s2^2 / m.
    const double var_phi = s2 / sxx;
    const double var_a = s2 * (1.0 / md + mx * mx / sxx);
    const double cov_a_phi = -s2 * mx / sxx;
    const double var_s2 = 2.0 * s2 * s2 / md;

    res.se_mu = std::sqrt(var_phi) / (phi * dt);

    const double g_a = 1.0 / (1.0 - phi);
    const double g_phi = a / ((1.0 - phi) * (1.0 - phi));
    res.se_theta = std::sqrt(g_a * g_a * var_a + 2.0 * g_a * g_phi * cov_a_phi + g_phi * g_phi * var_phi);

    // sigma^2 = s2 f(phi) / dt with f(phi) = -2 ln(phi) / (1 - phi^2).
    const double f = -2.0 * std::log(phi) / one_m_phi2;
    const double df = (-2.0 * one_m_phi2 / phi - 4.0 * phi * std::log(phi)) / (one_m_phi2 * one_m_phi2);
    const double d_s2 = f / dt;
    const double d_phi = s2 * df / dt;
    const double var_sigma2 = d_s2 * d_s2 * var_s2 + d_phi * d_phi * var_phi;
    res.se_sigma = std::sqrt(var_sigma2) / (2.0 * res.sigma);
    return res;
}

}  // namespace xou
