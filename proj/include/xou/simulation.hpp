#pragma once

// Exact-transition OU paths, threshold strategy execution and Monte Carlo
// valuation.

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "xou/double_stopping.hpp"
#include "xou/model.hpp"
#include "xou/switching.hpp"

namespace xou {

struct PathSpec {
    double x0;
    double dt;
    std::size_t n_steps;
    std::uint64_t seed;

    void validate() const;
};

struct Path {
    double dt;
    std::vector<double> x;  ///< x[0] = x0, x[i] at time i * dt

    double time(std::size_t i) const { return static_cast<double>(i) * dt; }
};

/// Per-path seed derived from a root seed: splitmix64(root + golden * (index + 1)).
std::uint64_t substream_seed(std::uint64_t root, std::uint64_t index);

Path sample_path(const PathSpec& spec, const ModelParams& params);

enum class Position { Flat, Long };
enum class EventKind { Enter, Exit };

struct TradeEvent {
    double time;
    EventKind kind;
    double log_price;
};

struct TradeLog {
    std::vector<TradeEvent> events;
    double discounted_cashflow = 0.0;
};

/// Threshold rule in log-price. The first entry happens on a visit to
/// [first_entry_lo, first_entry_hi]; later entries when X <= reentry_level.
/// Exits when X >= exit_level. With single_round_trip the rule stops after
/// its first exit.
struct StrategyRule {
    double first_entry_lo;
    double first_entry_hi;
    double reentry_level;
    double exit_level;
    bool single_round_trip;
};

StrategyRule rule_from(const DoubleStoppingSolution& sol);
StrategyRule rule_from(const SwitchingSolution& sol);
/// Never enters; exits at `exit_level`. From a long start this is the liquidation rule.
StrategyRule exit_only_rule(double exit_level);

/// Incremental executor shared by execute_strategy and the Monte Carlo loop.
class StrategyRunner {
public:
    StrategyRunner(const StrategyRule& rule, Position start, const Costs& costs, double r, bool record);

    /// Processes the observation X(t) = x. Returns false once the rule can take no further action.
    bool observe(double t, double x);
    bool finished() const { return finished_; }
    /// Interval of X that triggers the next action; observations outside it are no-ops.
    std::pair<double, double> trigger_window() const;
    bool holding() const { return long_; }
    const TradeLog& log() const { return log_; }
    std::size_t trades() const { return n_events_; }

private:
    StrategyRule rule_;
    Costs costs_;
    double r_;
    bool record_;
    bool long_;
    bool entered_once_ = false;
    bool finished_ = false;
    std::size_t n_events_ = 0;
    TradeLog log_;
};

TradeLog execute_strategy(const Path& path, const StrategyRule& rule, Position start, const Costs& costs,
                          double r);

struct McConfig {
    std::size_t n_paths = 200000;
    double dt = 1.0 / 2520.0;
    double horizon = 200.0;
    std::uint64_t seed = 20240607;
    unsigned threads = 0;  ///< 0 = hardware concurrency
    Position start = Position::Flat;

    void validate() const;
};

struct McResult {
    double estimate = 0.0;
    double std_error = 0.0;   ///< NaN when fewer than two paths
    bool std_error_available = false;
    std::size_t n_paths = 0;
    std::size_t paths_unfinished = 0;  ///< paths still active at the horizon
    double mean_trades = 0.0;
    double horizon = 0.0;
};

/// Mean and standard error of the discounted cash flow of `rule` started at x0.
McResult mc_value(double x0, const StrategyRule& rule, const ModelParams& params, const Costs& costs,
                  const McConfig& cfg);

/// Monte Carlo estimate of E_x0[exp(-r tau_kappa)] with grid monitoring.
McResult mc_hitting_factor(double x0, double kappa, const ModelParams& params, const McConfig& cfg);

/// Shift used to bound grid-monitoring bias: 2 * 0.5826 * sigma * sqrt(dt).
double monitoring_shift(const ModelParams& params, double dt);

/// One-sided bound on (continuous value - grid-monitored value) for the
/// double-stopping rule, obtained by moving every threshold outward by
/// monitoring_shift. Includes the horizon truncation term.
double passage_bias_bound(double x0, const DoubleStoppingSolution& sol, const EigenSystem& es, const Costs& costs,
                          const McConfig& cfg);

/// Same bound for the hitting factor F(x0)/F(kappa) (x0 < kappa) or G(x0)/G(kappa).
double hitting_bias_bound(double x0, double kappa, const EigenSystem& es, const McConfig& cfg);

}  // namespace xou
