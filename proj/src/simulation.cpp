#include "xou/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <thread>

#include <boost/random/normal_distribution.hpp>

#include "xou/errors.hpp"

namespace xou {

void PathSpec::validate() const {
    if (!std::isfinite(x0)) throw ValidationError("path x0 must be finite");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("path dt must be positive");
    if (n_steps < 1) throw ValidationError("path n_steps must be at least 1");
}

void McConfig::validate() const {
    if (n_paths < 1) throw ValidationError("n_paths must be at least 1");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("dt must be positive");
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ValidationError("horizon must be positive");
}

std::uint64_t substream_seed(std::uint64_t root, std::uint64_t index) {
    std::uint64_t z = root + 0x9E3779B97F4A7C15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

namespace {

struct OuStepper {
    double theta;
    double decay;
    double sd;

    OuStepper(const ModelParams& p, double dt)
        : theta(p.theta),
          decay(std::exp(-p.mu * dt)),
          sd(p.sigma * std::sqrt(-std::expm1(-2.0 * p.mu * dt) / (2.0 * p.mu))) {}

    double next(double x, double z) const { return theta + (x - theta) * decay + sd * z; }
};

// Pairwise summation keeps the total independent of how paths were split across threads.
double pairwise_sum(const double* v, std::size_t n) {
    if (n <= 8) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += v[i];
        return s;
    }
    const std::size_t h = n / 2;
    return pairwise_sum(v, h) + pairwise_sum(v + h, n - h);
}

unsigned worker_count(unsigned requested, std::size_t n_paths) {
    unsigned n = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
    return static_cast<unsigned>(std::min<std::size_t>(n, n_paths));
}

template <class PerPath>
void run_parallel(std::size_t n_paths, unsigned threads, PerPath&& per_path) {
    const unsigned workers = worker_count(threads, n_paths);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n_paths; ++i) per_path(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < n_paths; i += workers) per_path(i);
        });
    }
    for (auto& t : pool) t.join();
}

McResult summarize(const std::vector<double>& values, const McConfig& cfg) {
    McResult res{};
    res.n_paths = values.size();
    res.horizon = cfg.horizon;
    const double n = static_cast<double>(values.size());
    res.estimate = pairwise_sum(values.data(), values.size()) / n;
    if (values.size() < 2) {
        res.std_error = std::numeric_limits<double>::quiet_NaN();
        res.std_error_available = false;
        return res;
    }
    std::vector<double> sq(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double d = values[i] - res.estimate;
        sq[i] = d * d;
    }
    const double var = pairwise_sum(sq.data(), sq.size()) / (n - 1.0);
    res.std_error = std::sqrt(var / n);
    res.std_error_available = true;
    return res;
}

}  // namespace

Path sample_path(const PathSpec& spec, const ModelParams& params) {
    spec.validate();
    params.validate();
    const OuStepper step(params, spec.dt);
    std::mt19937_64 rng(spec.seed);
    boost::random::normal_distribution<double> normal;
    Path p{spec.dt, {}};
    p.x.resize(spec.n_steps + 1);
    p.x[0] = spec.x0;
    for (std::size_t i = 1; i <= spec.n_steps; ++i) p.x[i] = step.next(p.x[i - 1], normal(rng));
    return p;
}

StrategyRule rule_from(const DoubleStoppingSolution& sol) {
    return {sol.a_star, sol.d_star, sol.d_star, sol.b_star, true};
}

StrategyRule rule_from(const SwitchingSolution& sol) {
    if (!sol.recurrent()) return exit_only_rule(sol.no_entry().b_star);
    const Recurrent& r = sol.rec();
    return {r.a_tilde, r.d_tilde, r.d_tilde, r.b_tilde, false};
}

StrategyRule exit_only_rule(double exit_level) {
    const double inf = std::numeric_limits<double>::infinity();
    return {inf, -inf, -inf, exit_level, false};
}

StrategyRunner::StrategyRunner(const StrategyRule& rule, Position start, const Costs& costs, double r, bool record)
    : rule_(rule), costs_(costs), r_(r), record_(record), long_(start == Position::Long) {
    // A long start has already made its first purchase.
    entered_once_ = long_;
    const bool can_enter = rule_.first_entry_lo <= rule_.first_entry_hi;
    if (!long_ && !can_enter) finished_ = true;
}

bool StrategyRunner::observe(double t, double x) {
    if (finished_) return false;
    if (long_) {
        if (x >= rule_.exit_level) {
            log_.discounted_cashflow += std::exp(-r_ * t) * reward_sell(x, costs_);
            if (record_) log_.events.push_back({t, EventKind::Exit, x});
            ++n_events_;
            long_ = false;
            const bool may_reenter = !rule_.single_round_trip && rule_.reentry_level > -std::numeric_limits<double>::infinity();
            if (!may_reenter) finished_ = true;
        }
    } else {
        const bool hit = entered_once_ ? x <= rule_.reentry_level
                                       : (x >= rule_.first_entry_lo && x <= rule_.first_entry_hi);
        if (hit) {
            log_.discounted_cashflow -= std::exp(-r_ * t) * reward_buy(x, costs_);
            if (record_) log_.events.push_back({t, EventKind::Enter, x});
            ++n_events_;
            long_ = true;
            entered_once_ = true;
        }
    }
    return !finished_;
}

std::pair<double, double> StrategyRunner::trigger_window() const {
    const double inf = std::numeric_limits<double>::infinity();
    if (long_) return {rule_.exit_level, inf};
    if (entered_once_) return {-inf, rule_.reentry_level};
    return {rule_.first_entry_lo, rule_.first_entry_hi};
}

TradeLog execute_strategy(const Path& path, const StrategyRule& rule, Position start, const Costs& costs,
                          double r) {
    StrategyRunner run(rule, start, costs, r, true);
    for (std::size_t i = 0; i < path.x.size(); ++i) {
        if (!run.observe(path.time(i), path.x[i])) break;
    }
    return run.log();
}

McResult mc_value(double x0, const StrategyRule& rule, const ModelParams& params, const Costs& costs,
                  const McConfig& cfg) {
    cfg.validate();
    params.validate();
    const OuStepper step(params, cfg.dt);
    const auto n_steps = static_cast<std::size_t>(std::ceil(cfg.horizon / cfg.dt));
    std::vector<double> values(cfg.n_paths);
    std::vector<std::size_t> trades(cfg.n_paths);
    std::vector<char> unfinished(cfg.n_paths);

    run_parallel(cfg.n_paths, cfg.threads, [&](std::size_t i) {
        std::mt19937_64 rng(substream_seed(cfg.seed, i));
        boost::random::normal_distribution<double> normal;
        StrategyRunner run(rule, cfg.start, costs, params.r, false);
        double x = x0;
        bool active = run.observe(0.0, x);
        std::size_t k = 0;
        while (active && k < n_steps) {
            const auto [lo, hi] = run.trigger_window();
            // Advance until the next action triggers or the horizon is reached.
            do {
                x = step.next(x, normal(rng));
                ++k;
            } while (k < n_steps && !(x >= lo && x <= hi));
            active = run.observe(static_cast<double>(k) * cfg.dt, x);
        }
        values[i] = run.log().discounted_cashflow;
        trades[i] = run.trades();
        unfinished[i] = active ? 1 : 0;
    });

    McResult res = summarize(values, cfg);
    std::size_t total_trades = 0;
    for (std::size_t i = 0; i < cfg.n_paths; ++i) {
        total_trades += trades[i];
        res.paths_unfinished += unfinished[i] ? 1 : 0;
    }
    res.mean_trades = static_cast<double>(total_trades) / static_cast<double>(cfg.n_paths);
    return res;
}

McResult mc_hitting_factor(double x0, double kappa, const ModelParams& params, const McConfig& cfg) {
    cfg.validate();
    params.validate();
    const OuStepper step(params, cfg.dt);
    const auto n_steps = static_cast<std::size_t>(std::ceil(cfg.horizon / cfg.dt));
    const bool from_below = x0 <= kappa;
    std::vector<double> values(cfg.n_paths);
    run_parallel(cfg.n_paths, cfg.threads, [&](std::size_t i) {
        std::mt19937_64 rng(substream_seed(cfg.seed, i));
        boost::random::normal_distribution<double> normal;
        double x = x0;
        double v = 0.0;
        for (std::size_t k = 0; k <= n_steps; ++k) {
            if (k > 0) x = step.next(x, normal(rng));
            if (from_below ? x >= kappa : x <= kappa) {
                v = std::exp(-params.r * static_cast<double>(k) * cfg.dt);
                break;
            }
        }
        values[i] = v;
    });
    return summarize(values, cfg);
}

double monitoring_shift(const ModelParams& params, double dt) { return 2.0 * 0.5826 * params.sigma * std::sqrt(dt); }

double passage_bias_bound(double x0, const DoubleStoppingSolution& sol, const EigenSystem& es, const Costs& costs,
                          const McConfig& cfg) {
    const double delta = monitoring_shift(es.params(), cfg.dt);
    const double J = value_entry(x0, sol, es, costs);
    double a = sol.a_star + delta;
    double d = sol.d_star - delta;
    if (a > d) a = d;
    const double shifted = strategy_value(x0, a, d, sol.b_star + delta, es, costs);
    const double tail = std::exp(-es.params().r * cfg.horizon) *
                        std::max(value_entry(sol.d_star, sol, es, costs), reward_sell(sol.b_star, costs));
    return std::max(0.0, J - shifted) + tail;
}

double hitting_bias_bound(double x0, double kappa, const EigenSystem& es, const McConfig& cfg) {
    const double delta = monitoring_shift(es.params(), cfg.dt);
    const double exact = es.discounted_hitting_factor(x0, kappa);
    const double shifted = es.discounted_hitting_factor(x0, x0 <= kappa ? kappa + delta : kappa - delta);
    return (exact - shifted) + std::exp(-es.params().r * cfg.horizon);
}

}  // namespace xou
