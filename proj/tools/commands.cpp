#include "commands.hpp"

#include <cmath>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "xou/calibration.hpp"
#include "xou/errors.hpp"
#include "xou/simulation.hpp"
#include "xou/verification.hpp"

namespace xou::cli {

using json = nlohmann::ordered_json;

namespace {

json num(double v) {
    if (!std::isfinite(v)) return nullptr;
    return round_sig(v, kJsonDigits);
}

void emit(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        std::cout.flush();
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ValidationError("cannot write '" + path + "'");
    f << text;
}

json inputs_json(const SolveInputs& in) {
    return {{"mu", num(in.params.mu)},       {"sigma", num(in.params.sigma)},
            {"theta", num(in.params.theta)}, {"r", num(in.params.r)},
            {"c_b", num(in.costs.c_b)},      {"c_s", num(in.costs.c_s)},
            {"quad_rel_tol", num(in.quad.rel_tol)}, {"quad_abs_tol", num(in.quad.abs_tol)},
            {"quad_max_subdivisions", in.quad.max_subdivisions}, {"quad_log_cutoff", num(in.quad.log_cutoff)}};
}

json tool_json() { return {{"name", "xou"}, {"version", kToolVersion}}; }

std::string csv_cell(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += '"';
        q += c == '\n' ? ' ' : c;
    }
    return q + "\"";
}

unsigned worker_count(const RunConfig& cfg) {
    const auto t = cfg.count_or("threads", 0);
    if (t > 0) return static_cast<unsigned>(t);
    return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace

int cmd_solve(const RunConfig& cfg, const Outputs& out) {
    const SolutionRecord rec = solve_all(cfg.solve_inputs());
    emit(out.out, record_to_json(rec));
    if (!rec.all_solved()) {
        if (!rec.ds_message.empty()) std::cerr << "double stopping: " << rec.ds_message << "\n";
        if (!rec.sw_message.empty()) std::cerr << "switching: " << rec.sw_message << "\n";
        return kSolver;
    }
    return kOk;
}

const char* sweep_header() {
    return "sweep_var,value,mu,sigma,theta,r,c_b,c_s,b_star,d_star,a_star,exp_b_star,exp_d_star,exp_a_star,"
           "regime,b_tilde,d_tilde,a_tilde,exp_b_tilde,exp_d_tilde,exp_a_tilde,theorem,ds_status,error";
}

int cmd_sweep(const RunConfig& cfg, const Outputs& out) {
    const std::string var = cfg.text_or("sweep_var", "");
    static const char* vars[] = {"mu", "sigma", "theta", "r", "c_b", "c_s"};
    bool ok_var = false;
    for (const char* v : vars) ok_var = ok_var || var == v;
    if (!ok_var) throw ValidationError("sweep_var must be one of mu, sigma, theta, r, c_b, c_s (got '" + var + "')");
    const double from = cfg.number("sweep_from");
    const double to = cfg.number("sweep_to");
    const auto points = cfg.count_or("sweep_points", 11);
    if (points < 1) throw ValidationError("sweep_points must be at least 1");
    if (points > 1 && !(to != from)) throw ValidationError("sweep_from and sweep_to must differ");

    // Validate the non-swept inputs once, with the swept key at its first value.
    std::vector<RunConfig> rows;
    for (std::uint64_t i = 0; i < points; ++i) {
        const double t = points == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(points - 1);
        const double v = round_sig(from + (to - from) * t, kJsonDigits);
        RunConfig row = cfg;
        std::ostringstream os;
        os.precision(17);
        os << v;
        row.set(var, os.str());
        rows.push_back(row);
    }

    std::vector<std::string> lines(rows.size());
    const unsigned workers = std::min<unsigned>(worker_count(cfg), static_cast<unsigned>(rows.size()));
    auto work = [&](unsigned w) {
        for (std::size_t i = w; i < rows.size(); i += workers) {
            std::ostringstream line;
            line << var << "," << csv_number(rows[i].number(var));
            std::string error;
            try {
                const SolveInputs in = rows[i].solve_inputs();
                const SolutionRecord rec = solve_all(in);
                const auto& p = in.params;
                for (double v : {p.mu, p.sigma, p.theta, p.r, in.costs.c_b, in.costs.c_s}) line << "," << csv_number(v);
                auto cell = [&](bool have, double v) { line << "," << (have ? csv_number(v) : std::string()); };
                const bool ds = rec.double_stopping.has_value();
                const double bs = rec.exit ? rec.exit->b_star : NAN;
                cell(rec.exit.has_value(), bs);
                cell(ds, ds ? rec.double_stopping->d_star : 0.0);
                cell(ds, ds ? rec.double_stopping->a_star : 0.0);
                cell(rec.exit.has_value(), std::exp(bs));
                cell(ds, ds ? std::exp(rec.double_stopping->d_star) : 0.0);
                cell(ds, ds ? std::exp(rec.double_stopping->a_star) : 0.0);
                const bool rc = rec.switching && rec.switching->recurrent();
                line << "," << (rec.switching ? (rc ? "recurrent" : "no_entry") : "");
                double bt = 0, dt = 0, at = 0;
                if (rc) {
                    bt = rec.switching->rec().b_tilde;
                    dt = rec.switching->rec().d_tilde;
                    at = rec.switching->rec().a_tilde;
                } else if (rec.switching) {
                    bt = rec.switching->no_entry().b_star;
                }
                cell(rec.switching.has_value(), bt);
                cell(rc, dt);
                cell(rc, at);
                cell(rec.switching.has_value(), std::exp(bt));
                cell(rc, std::exp(dt));
                cell(rc, std::exp(at));
                line << "," << (rec.switching ? theorem_label(rec.switching->report.chosen) : "");
                line << "," << status_name(rec.ds_status);
                if (!rec.ds_message.empty()) error += "double stopping: " + rec.ds_message;
                if (!rec.sw_message.empty()) error += std::string(error.empty() ? "" : "; ") + "switching: " + rec.sw_message;
            } catch (const std::exception& e) {
                line.str("");
                line << var << "," << csv_number(rows[i].number(var));
                for (int k = 0; k < 20; ++k) line << ",";
                line << "failed";
                error = e.what();
            }
            line << "," << csv_cell(error) << "\n";
            lines[i] = line.str();
        }
    };
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();

    std::string text = std::string(sweep_header()) + "\n";
    for (const auto& l : lines) text += l;
    emit(out.out, text);
    return kOk;
}

namespace {

const char* event_name(EventKind k) { return k == EventKind::Enter ? "enter" : "exit"; }

json trade_summary(const TradeLog& log) {
    std::size_t round_trips = 0;
    for (const auto& e : log.events) round_trips += e.kind == EventKind::Exit;
    const bool ends_long = !log.events.empty() && log.events.back().kind == EventKind::Enter;
    return {{"events", log.events.size()}, {"round_trips", round_trips}, {"ends_long", ends_long},
            {"discounted_cashflow", num(log.discounted_cashflow)}};
}

}  // namespace

int cmd_simulate(const RunConfig& cfg, const Outputs& out) {
    const SolveInputs in = cfg.solve_inputs();
    double x0 = cfg.has("price0") ? std::log(cfg.number("price0")) : cfg.number_or("x0", in.params.theta);
    if (cfg.has("price0") && !(cfg.number("price0") > 0.0)) throw ValidationError("price0 must be positive");
    x0 = round_sig(x0, kJsonDigits);
    const double dt = round_sig(cfg.number_or("dt", 1.0 / 2520.0), kJsonDigits);
    const double horizon = round_sig(cfg.number_or("horizon", 10.0), kJsonDigits);
    const std::uint64_t seed = cfg.count_or("seed", 20240607);
    if (!(dt > 0.0) || !(horizon > 0.0)) throw ValidationError("dt and horizon must be positive");
    const auto n_steps = static_cast<std::size_t>(std::llround(horizon / dt));
    if (n_steps < 1 || n_steps > 200000000) throw ValidationError("horizon / dt must be between 1 and 2e8 steps");

    SolutionRecord rec = solve_all(in);
    rec.seeds = {seed};
    const PathSpec spec{x0, dt, n_steps, seed};
    const Path path = sample_path(spec, in.params);

    json summary;
    summary["tool"] = tool_json();
    json inputs = inputs_json(in);
    inputs["x0"] = num(x0);
    inputs["dt"] = num(dt);
    inputs["horizon"] = num(horizon);
    inputs["seed"] = seed;
    summary["inputs"] = inputs;
    summary["seeds"] = rec.seeds;
    summary["n_steps"] = n_steps;

    std::ostringstream trades;
    trades << "strategy,time,event,log_price,price\n";
    auto run = [&](const char* name, const StrategyRule& rule) {
        const TradeLog log = execute_strategy(path, rule, Position::Flat, in.costs, in.params.r);
        for (const auto& e : log.events) {
            trades << name << "," << csv_number(e.time) << "," << event_name(e.kind) << "," << csv_number(e.log_price)
                   << "," << csv_number(std::exp(e.log_price)) << "\n";
        }
        summary[name] = trade_summary(log);
    };
    if (rec.double_stopping) {
        run("double_stopping", rule_from(*rec.double_stopping));
    } else {
        summary["double_stopping"] = {{"status", status_name(rec.ds_status)}, {"message", rec.ds_message}};
    }
    if (rec.switching) {
        run("switching", rule_from(*rec.switching));
    } else {
        summary["switching"] = {{"status", status_name(rec.sw_status)}, {"message", rec.sw_message}};
    }

    if (!out.path_out.empty()) {
        std::ostringstream p;
        p << "t,X,xi\n";
        for (std::size_t i = 0; i < path.x.size(); ++i) {
            p << csv_number(path.time(i)) << "," << csv_number(path.x[i]) << "," << csv_number(std::exp(path.x[i]))
              << "\n";
        }
        emit(out.path_out, p.str());
    }
    if (!out.prices_out.empty()) {
        // Full precision here: this file feeds calibration, not plots.
        std::ostringstream p;
        p.precision(17);
        p << "timestamp,price\n";
        for (std::size_t i = 0; i < path.x.size(); ++i) p << path.time(i) << "," << std::exp(path.x[i]) << "\n";
        emit(out.prices_out, p.str());
    }
    if (!out.trades_out.empty()) emit(out.trades_out, trades.str());
    emit(out.out, summary.dump(2) + "\n");
    return rec.all_solved() ? kOk : kSolver;
}

namespace {

json residual_json(const ResidualReport& r) {
    json j{{"tolerance", num(r.tolerance)}, {"grid_points", r.grid.size()}, {"worst", num(r.worst)},
           {"worst_x", num(r.worst_x)},     {"max_abs", num(r.max_abs)}};
    json kinks = json::array();
    for (const auto& k : r.kinks) {
        kinks.push_back({{"name", k.name}, {"x", num(k.x)}, {"value_gap", num(k.value_gap)},
                         {"slope_gap", num(k.slope_gap)}, {"ok", k.ok}});
    }
    j["kinks"] = kinks;
    if (r.j_identically_zero_checked) j["J_identically_zero"] = r.j_identically_zero;
    j["pass"] = r.pass;
    return j;
}

}  // namespace

int cmd_verify(const RunConfig& cfg, const Outputs& out) {
    const SolveInputs in = cfg.solve_inputs();
    const EigenSystem es(in.params, in.quad);
    const Costs& co = in.costs;
    const double theta = in.params.theta;
    const GridSpec grid{cfg.number_or("grid_lo", theta - 3.0), cfg.number_or("grid_hi", theta + 3.0),
                        static_cast<std::size_t>(cfg.count_or("grid_n", 4000))};
    if (!(grid.x_lo < grid.x_hi) || grid.n < 10) throw ValidationError("residual grid needs grid_lo < grid_hi and grid_n >= 10");
    const double tol = cfg.number_or("tolerance", 1e-6);
    if (!(tol > 0.0)) throw ValidationError("tolerance must be positive");

    json report;
    report["tool"] = tool_json();
    json inputs = inputs_json(in);
    inputs["grid_lo"] = num(grid.x_lo);
    inputs["grid_hi"] = num(grid.x_hi);
    inputs["grid_n"] = grid.n;
    inputs["tolerance"] = num(tol);
    bool pass = true;

    SwitchingSolution sw = solve_switching(es, co);
    if (cfg.has("perturb_b")) {
        const double delta = cfg.number("perturb_b");
        inputs["perturb_b"] = num(delta);
        if (sw.recurrent()) {
            const Recurrent& r = sw.rec();
            sw.regime = threshold_strategy(r.a_tilde, r.d_tilde, r.b_tilde + delta, es, co);
        } else {
            const double b = sw.no_entry().b_star + delta;
            sw.regime = NoEntry{b, reward_sell(b, co) / es.F(b)};
        }
    }
    report["inputs"] = inputs;

    json swj{{"regime", sw.recurrent() ? "recurrent" : "no_entry"}, {"theorem", theorem_label(sw.report.chosen)}};
    swj.update(residual_json(vi_residuals(sw, es, co, grid, tol)));
    pass = pass && swj["pass"].get<bool>();
    report["switching_vi"] = swj;

    const ExitSolution exit = solve_exit(es, co);
    std::optional<DoubleStoppingSolution> ds;
    try {
        ds = solve_entry(es, co, exit);
    } catch (const TrivialProblem& e) {
        report["double_stopping_vi"] = {{"status", "trivial"}, {"message", e.what()}};
    }
    if (ds) {
        const ResidualReport r = vi_residuals(*ds, es, co, grid, tol);
        pass = pass && r.pass;
        report["double_stopping_vi"] = residual_json(r);

        const double lo = theta - 2.0;
        const double hi = ds->b_star + 1.0;
        const TransformGrid tg = build_transforms(lo, hi, 4000, exit, es, co);
        const MajorantReport m = concave_majorant_oracle(tg, *ds, es, co);
        pass = pass && m.pass;
        report["majorant"] = {{"x_lo", num(lo)},
                              {"x_hi", num(hi)},
                              {"grid_points", tg.x.size()},
                              {"max_rel_gap_V", num(m.max_rel_gap_V)},
                              {"max_rel_gap_J", num(m.max_rel_gap_J)},
                              {"exit_tangency_x", num(m.exit_tangency_x)},
                              {"entry_peak_x", num(m.entry_peak_x)},
                              {"cell", num(m.cell)},
                              {"exit_tangency_ok", m.exit_tangency_ok},
                              {"entry_peak_ok", m.entry_peak_ok},
                              {"dominance_ok", m.dominance_ok},
                              {"pass", m.pass}};
    } else {
        report["majorant"] = nullptr;
    }

    const LemmaReport lemmas = lemma_property_suite(exit, ds ? &*ds : nullptr, es, co);
    json clauses = json::array();
    for (const auto& c : lemmas.clauses) clauses.push_back({{"clause", c.clause}, {"passed", c.passed}, {"detail", c.detail}});
    report["lemmas"] = {{"clauses", clauses}, {"pass", lemmas.pass()}};
    pass = pass && lemmas.pass();
    report["pass"] = pass;

    emit(out.out, report.dump(2) + "\n");
    return pass ? kOk : kVerification;
}

int cmd_calibrate(const RunConfig& cfg, const std::string& prices_csv, const Outputs& out) {
    const PriceSeries series = read_price_csv_file(prices_csv);
    const double dt = cfg.number_or("dt", 0.0);
    const CalibrationResult c = calibrate(series, dt);
    json j;
    j["tool"] = tool_json();
    j["inputs"] = {{"prices", prices_csv}, {"dt", num(c.dt)}, {"n_obs", c.n_obs}};
    j["mu"] = num(c.mu);
    j["theta"] = num(c.theta);
    j["sigma"] = num(c.sigma);
    if (cfg.has("r")) j["r"] = num(cfg.number("r"));
    j["std_errors"] = {{"mu", num(c.se_mu)}, {"theta", num(c.se_theta)}, {"sigma", num(c.se_sigma)}};
    j["phi"] = num(c.phi);
    j["log_likelihood"] = num(c.log_likelihood);
    emit(out.out, j.dump(2) + "\n");
    return kOk;
}

}  // namespace xou::cli
