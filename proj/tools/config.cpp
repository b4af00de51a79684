#include "config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "xou/errors.hpp"

namespace xou::cli {

const std::vector<KeyInfo>& known_keys() {
    static const std::vector<KeyInfo> keys = {
        {"mu", "mean-reversion speed"},
        {"theta", "long-run mean of the log price"},
        {"sigma", "log-price volatility"},
        {"r", "discount rate"},
        {"c_b", "fixed cost per entry"},
        {"c_s", "fixed cost per exit"},
        {"quad_rel_tol", "quadrature relative tolerance"},
        {"quad_abs_tol", "quadrature absolute tolerance"},
        {"quad_max_subdivisions", "quadrature bisection depth"},
        {"quad_log_cutoff", "log-drop at which integrand tails are cut"},
        {"sweep_var", "swept parameter: mu, sigma, theta, r, c_b or c_s"},
        {"sweep_from", "first sweep value"},
        {"sweep_to", "last sweep value"},
        {"sweep_points", "number of sweep values"},
        {"x0", "starting log price"},
        {"price0", "starting price (overrides x0)"},
        {"dt", "time step"},
        {"horizon", "simulated time span"},
        {"seed", "root random seed"},
        {"grid_lo", "lower end of the residual grid"},
        {"grid_hi", "upper end of the residual grid"},
        {"grid_n", "residual grid points"},
        {"tolerance", "scaled residual tolerance"},
        {"perturb_b", "shift added to the switching exit level before verifying"},
        {"threads", "worker threads, 0 for all cores"},
    };
    return keys;
}

namespace {

bool is_known(const std::string& key) {
    for (const auto& k : known_keys()) {
        if (key == k.name) return true;
    }
    return false;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace

void RunConfig::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    load_text(ss.str(), path);
}

void RunConfig::load_text(const std::string& text, const std::string& origin) {
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    std::map<std::string, std::string> seen;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string where = origin + ":" + std::to_string(line_no);
        line = trim(line.substr(0, line.find('#')));
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ValidationError(where + ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (!is_known(key)) throw ValidationError(where + ": unknown key '" + key + "'");
        if (value.empty()) throw ValidationError(where + ": key '" + key + "' has no value");
        if (seen.count(key)) throw ValidationError(where + ": key '" + key + "' given twice");
        seen[key] = value;
    }
    for (const auto& [k, v] : seen) values_[k] = v;
}

void RunConfig::set(const std::string& key, const std::string& value) {
    if (!is_known(key)) throw ValidationError("unknown key '" + key + "'");
    values_[key] = trim(value);
}

double RunConfig::number(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw ValidationError("missing required key '" + key + "'");
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(it->second, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != it->second.size() || !std::isfinite(v)) {
        throw ValidationError("key '" + key + "': '" + it->second + "' is not a finite number");
    }
    return v;
}

double RunConfig::number_or(const std::string& key, double fallback) const {
    return has(key) ? number(key) : fallback;
}

std::uint64_t RunConfig::count_or(const std::string& key, std::uint64_t fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    const std::string& s = it->second;
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
        throw ValidationError("key '" + key + "': '" + s + "' is not a non-negative integer");
    }
    try {
        return std::stoull(s);
    } catch (const std::exception&) {
        throw ValidationError("key '" + key + "': '" + s + "' is out of range");
    }
}

std::string RunConfig::text_or(const std::string& key, const std::string& fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

SolveInputs RunConfig::solve_inputs() const {
    auto rd = [](double v) { return round_sig(v, kJsonDigits); };
    SolveInputs in;
    in.params = {rd(number("mu")), rd(number("theta")), rd(number("sigma")), rd(number("r"))};
    in.costs = {rd(number("c_b")), rd(number("c_s"))};
    const QuadratureConfig def;
    in.quad.rel_tol = rd(number_or("quad_rel_tol", def.rel_tol));
    in.quad.abs_tol = rd(number_or("quad_abs_tol", def.abs_tol));
    const auto depth = count_or("quad_max_subdivisions", def.max_subdivisions);
    if (depth > 60) throw ValidationError("key 'quad_max_subdivisions' must be at most 60");
    in.quad.max_subdivisions = static_cast<unsigned>(depth);
    in.quad.log_cutoff = rd(number_or("quad_log_cutoff", def.log_cutoff));
    in.params.validate();
    in.costs.validate();
    in.quad.validate();
    return in;
}

void apply_record_inputs(RunConfig& cfg, const SolutionRecord& rec) {
    auto put = [&](const char* key, double v) {
        std::ostringstream os;
        os.precision(17);
        os << v;
        cfg.set(key, os.str());
    };
    const auto& in = rec.inputs;
    put("mu", in.params.mu);
    put("theta", in.params.theta);
    put("sigma", in.params.sigma);
    put("r", in.params.r);
    put("c_b", in.costs.c_b);
    put("c_s", in.costs.c_s);
    put("quad_rel_tol", in.quad.rel_tol);
    put("quad_abs_tol", in.quad.abs_tol);
    cfg.set("quad_max_subdivisions", std::to_string(in.quad.max_subdivisions));
    put("quad_log_cutoff", in.quad.log_cutoff);
}

}  // namespace xou::cli
