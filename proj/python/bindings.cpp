#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "xou/calibration.hpp"
#include "xou/errors.hpp"
#include "xou/record.hpp"
#include "xou/simulation.hpp"
#include "xou/verification.hpp"

namespace py = pybind11;
using namespace xou;

namespace {

SolveInputs inputs(double mu, double theta, double sigma, double r, double c_b, double c_s) {
    SolveInputs in{{mu, theta, sigma, r}, {c_b, c_s}, {}};
    in.params.validate();
    in.costs.validate();
    return in;
}

}  // namespace

PYBIND11_MODULE(_xou, m) {
    m.doc() = "Optimal entry and exit levels for an exponential OU price";
    m.attr("__version__") = kToolVersion;

    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<TrivialProblem>(m, "TrivialProblem", PyExc_RuntimeError);
    py::register_exception<SolverFailure>(m, "SolverFailure", PyExc_RuntimeError);
    py::register_exception<NumericFailure>(m, "NumericFailure", PyExc_RuntimeError);

    m.def(
        "solve_json",
        [](double mu, double theta, double sigma, double r, double c_b, double c_s) {
            return record_to_json(solve_all(inputs(mu, theta, sigma, r, c_b, c_s)));
        },
        py::arg("mu"), py::arg("theta"), py::arg("sigma"), py::arg("r"), py::arg("c_b"), py::arg("c_s"),
        "Solve both problems; returns the JSON record text.");

    m.def(
        "eigenfunctions",
        [](double mu, double theta, double sigma, double r, const std::vector<double>& x) {
            const ModelParams p{mu, theta, sigma, r};
            p.validate();
            const EigenSystem es(p);
            std::vector<double> logF, logG;
            for (double v : x) {
                logF.push_back(es.at(v).log_F);
                logG.push_back(es.at(v).log_G);
            }
            return py::make_tuple(logF, logG);
        },
        py::arg("mu"), py::arg("theta"), py::arg("sigma"), py::arg("r"), py::arg("x"),
        "log F and log G at each x.");

    m.def(
        "verify_switching",
        [](double mu, double theta, double sigma, double r, double c_b, double c_s, double perturb_b) {
            const SolveInputs in = inputs(mu, theta, sigma, r, c_b, c_s);
            const EigenSystem es(in.params);
            SwitchingSolution sw = solve_switching(es, in.costs);
            if (perturb_b != 0.0) {
                if (sw.recurrent()) {
                    const Recurrent& rc = sw.rec();
                    sw.regime = threshold_strategy(rc.a_tilde, rc.d_tilde, rc.b_tilde + perturb_b, es, in.costs);
                } else {
                    const double b = sw.no_entry().b_star + perturb_b;
                    sw.regime = NoEntry{b, reward_sell(b, in.costs) / es.F(b)};
                }
            }
            const ResidualReport rep = vi_residuals(sw, es, in.costs, {theta - 3.0, theta + 3.0, 4000});
            py::dict d;
            d["worst"] = rep.worst;
            d["worst_x"] = rep.worst_x;
            d["max_abs"] = rep.max_abs;
            d["passed"] = rep.pass;
            return d;
        },
        py::arg("mu"), py::arg("theta"), py::arg("sigma"), py::arg("r"), py::arg("c_b"), py::arg("c_s"),
        py::arg("perturb_b") = 0.0, "Variational-inequality residuals of the switching solution.");

    m.def(
        "sample_path",
        [](double mu, double theta, double sigma, double r, double x0, double dt, std::size_t n_steps,
           std::uint64_t seed) {
            const ModelParams p{mu, theta, sigma, r};
            p.validate();
            return sample_path({x0, dt, n_steps, seed}, p).x;
        },
        py::arg("mu"), py::arg("theta"), py::arg("sigma"), py::arg("r"), py::arg("x0"), py::arg("dt"),
        py::arg("n_steps"), py::arg("seed"), "Exact-transition log-price path, x0 first.");

    m.def(
        "calibrate",
        [](const std::vector<double>& log_prices, double dt) {
            const CalibrationResult c = calibrate_log_prices(log_prices, dt);
            py::dict d;
            d["mu"] = c.mu;
            d["theta"] = c.theta;
            d["sigma"] = c.sigma;
            d["se_mu"] = c.se_mu;
            d["se_theta"] = c.se_theta;
            d["se_sigma"] = c.se_sigma;
            d["n_obs"] = c.n_obs;
            return d;
        },
        py::arg("log_prices"), py::arg("dt"), "Maximum-likelihood fit of mu, theta, sigma.");
}
