// xou: optimal entry and exit levels for an exponential OU price.

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "xou/errors.hpp"

using namespace xou;
using namespace xou::cli;

namespace {

struct Common {
    std::string config;
    std::map<std::string, std::string> flags;
    Outputs out;
};

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("-c,--config", c.config, "flat key = value config file")->check(CLI::ExistingFile);
    sub->add_option("-o,--out", c.out.out, "output file (default stdout)");
    for (const auto& k : known_keys()) {
        std::string names = std::string("--") + k.name;
        std::string dashed = k.name;
        for (char& ch : dashed) ch = ch == '_' ? '-' : ch;
        if (dashed != k.name) names += ",--" + dashed;
        sub->add_option_function<std::string>(
            names, [&c, key = std::string(k.name)](const std::string& v) { c.flags[key] = v; }, k.help);
    }
}

RunConfig build_config(const Common& c) {
    RunConfig cfg;
    if (!c.config.empty()) cfg.load_file(c.config);
    for (const auto& [k, v] : c.flags) cfg.set(k, v);
    return cfg;
}

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ValidationError("cannot open '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Optimal entry and exit levels for an exponential OU price with fixed costs"};
    app.set_version_flag("--version", kToolVersion);
    app.require_subcommand(1);

    Common solve_c, sweep_c, sim_c, verify_c, cal_c;
    std::string from_record;
    std::string prices;

    auto* solve = app.add_subcommand("solve", "solve both problems and write a JSON record");
    add_common(solve, solve_c);
    solve->add_option("--from-record", from_record, "take inputs from a JSON record")->check(CLI::ExistingFile);

    auto* sweep = app.add_subcommand("sweep", "solve over a grid of one parameter, CSV output");
    add_common(sweep, sweep_c);

    auto* sim = app.add_subcommand("simulate", "sample a path and run both strategies on it");
    add_common(sim, sim_c);
    sim->add_option("--path-out", sim_c.out.path_out, "path CSV (t, X, xi)");
    sim->add_option("--trades-out", sim_c.out.trades_out, "trade-log CSV");
    sim->add_option("--prices-out", sim_c.out.prices_out, "(timestamp, price) CSV");

    auto* verify = app.add_subcommand("verify", "residual, majorant and shape checks, JSON report");
    add_common(verify, verify_c);

    auto* cal = app.add_subcommand("calibrate", "fit mu, theta, sigma from a price CSV");
    add_common(cal, cal_c);
    cal->add_option("--prices", prices, "CSV with columns timestamp, price")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kValidation;
    }

    try {
        if (*solve) {
            RunConfig cfg;
            if (!from_record.empty()) {
                apply_record_inputs(cfg, record_from_json(slurp(from_record)));
                for (const auto& [k, v] : solve_c.flags) cfg.set(k, v);
            } else {
                cfg = build_config(solve_c);
            }
            return cmd_solve(cfg, solve_c.out);
        }
        if (*sweep) return cmd_sweep(build_config(sweep_c), sweep_c.out);
        if (*sim) return cmd_simulate(build_config(sim_c), sim_c.out);
        if (*verify) return cmd_verify(build_config(verify_c), verify_c.out);
        if (*cal) return cmd_calibrate(build_config(cal_c), prices, cal_c.out);
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kValidation;
    } catch (const TrivialProblem& e) {
        std::cerr << "trivial problem: " << e.what() << "\n";
        return kSolver;
    } catch (const SolverFailure& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        return kSolver;
    } catch (const NumericFailure& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return kSolver;
    }
    return kValidation;
}
