#include "xou/record.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <stdexcept>

#include <json.hpp>

#include "xou/errors.hpp"

namespace xou {

using json = nlohmann::ordered_json;

const char* status_name(SolveStatus s) {
    switch (s) {
        case SolveStatus::Solved: return "solved";
        case SolveStatus::Trivial: return "trivial";
        case SolveStatus::Failed: return "failed";
    }
    return "failed";
}

namespace {

SolveStatus status_from(const std::string& s) {
    if (s == "solved") return SolveStatus::Solved;
    if (s == "trivial") return SolveStatus::Trivial;
    if (s == "failed") return SolveStatus::Failed;
    throw ValidationError("unknown status '" + s + "' in record");
}

}  // namespace

SolutionRecord solve_all(const SolveInputs& in) {
    in.params.validate();
    in.costs.validate();
    in.quad.validate();
    SolutionRecord rec;
    rec.inputs = in;
    rec.landmarks = landmarks(in.params, in.costs);
    const EigenSystem es(in.params, in.quad);

    try {
        rec.exit = solve_exit(es, in.costs);
        rec.double_stopping = solve_entry(es, in.costs, *rec.exit);
        rec.ds_status = SolveStatus::Solved;
    } catch (const TrivialProblem& e) {
        rec.ds_status = SolveStatus::Trivial;
        rec.ds_message = e.what();
    } catch (const std::runtime_error& e) {
        rec.ds_status = SolveStatus::Failed;
        rec.ds_message = e.what();
    }

    try {
        rec.switching = solve_switching(es, in.costs);
        rec.sw_status = SolveStatus::Solved;
    } catch (const std::runtime_error& e) {
        rec.sw_status = SolveStatus::Failed;
        rec.sw_message = e.what();
    }
    return rec;
}

double round_sig(double v, int digits) {
    if (!std::isfinite(v) || v == 0.0) return v;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*e", digits - 1, v);
    return std::strtod(buf, nullptr);
}

std::string csv_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

namespace {

json num(double v) {
    if (!std::isfinite(v)) return nullptr;
    return round_sig(v, kJsonDigits);
}

double get_num(const json& j, const char* key) {
    if (!j.contains(key)) throw ValidationError(std::string("record is missing '") + key + "'");
    const json& v = j.at(key);
    if (v.is_null()) return std::numeric_limits<double>::quiet_NaN();
    if (!v.is_number()) throw ValidationError(std::string("record field '") + key + "' is not a number");
    return v.get<double>();
}

json threshold(double x) {
    const double lx = round_sig(x, kJsonDigits);
    return json{{"log", num(lx)}, {"price", num(std::exp(lx))}};
}

double get_threshold(const json& j, const char* key) {
    if (!j.contains(key)) throw ValidationError(std::string("record is missing '") + key + "'");
    return get_num(j.at(key), "log");
}

json diag_json(const ThresholdDiagnostics& d) {
    return json{{"residual", num(d.residual)}, {"bracket_width", num(d.bracket_width)}, {"iterations", d.iterations}};
}

ThresholdDiagnostics diag_from(const json& j) {
    return {get_num(j, "residual"), get_num(j, "bracket_width"), j.at("iterations").get<int>()};
}

json roots_json(const FbRoots& r) {
    if (std::holds_alternative<NoRoot>(r)) return json{{"kind", "none"}};
    if (const auto* s = std::get_if<SingleRoot>(&r)) return json{{"kind", "single"}, {"x0", num(s->x0)}};
    const auto& t = std::get<TwoRoots>(r);
    return json{{"kind", "two"}, {"x_b1", num(t.x_b1)}, {"x_b2", num(t.x_b2)}};
}

FbRoots roots_from(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "none") return NoRoot{};
    if (kind == "single") return SingleRoot{get_num(j, "x0")};
    if (kind == "two") return TwoRoots{get_num(j, "x_b1"), get_num(j, "x_b2")};
    throw ValidationError("unknown f_b root kind '" + kind + "'");
}

Theorem theorem_from(const std::string& s) {
    for (Theorem t : {Theorem::NoRootOrSingle, Theorem::RatioNotBelow, Theorem::NoStationaryPoint, Theorem::Recurrent}) {
        if (s == theorem_label(t)) return t;
    }
    throw ValidationError("unknown theorem label '" + s + "'");
}

json case_json(const CaseReport& c) {
    json j{{"fb_roots", roots_json(c.fb_root_case)}, {"a_tilde_exists", c.a_tilde_exists}};
    j["a_tilde"] = c.a_tilde_exists ? num(c.a_tilde) : json(nullptr);
    j["b_star"] = num(c.b_star);
    j["ratio_lhs"] = num(c.ratio_lhs);
    j["ratio_rhs"] = num(c.ratio_rhs);
    j["ratio_tie"] = c.ratio_tie;
    j["integral_test_lhs"] = num(c.integral_test_lhs);
    j["integral_test_rhs"] = num(c.integral_test_rhs);
    j["integral_test_holds"] = c.integral_test_holds;
    j["theorem"] = theorem_label(c.chosen);
    return j;
}

CaseReport case_from(const json& j) {
    CaseReport c;
    c.fb_root_case = roots_from(j.at("fb_roots"));
    c.a_tilde_exists = j.at("a_tilde_exists").get<bool>();
    c.a_tilde = c.a_tilde_exists ? get_num(j, "a_tilde") : 0.0;
    c.b_star = get_num(j, "b_star");
    c.ratio_lhs = get_num(j, "ratio_lhs");
    c.ratio_rhs = get_num(j, "ratio_rhs");
    c.ratio_tie = j.at("ratio_tie").get<bool>();
    c.integral_test_lhs = get_num(j, "integral_test_lhs");
    c.integral_test_rhs = get_num(j, "integral_test_rhs");
    c.integral_test_holds = j.at("integral_test_holds").get<bool>();
    c.chosen = theorem_from(j.at("theorem").get<std::string>());
    return c;
}

}  // namespace

std::string record_to_json(const SolutionRecord& rec) {
    const ModelParams& p = rec.inputs.params;
    const QuadratureConfig& q = rec.inputs.quad;
    json j;
    j["tool"] = {{"name", "xou"}, {"version", rec.tool_version}};
    j["inputs"] = {
        {"mu", num(p.mu)},
        {"sigma", num(p.sigma)},
        {"theta", num(p.theta)},
        {"r", num(p.r)},
        {"c_b", num(rec.inputs.costs.c_b)},
        {"c_s", num(rec.inputs.costs.c_s)},
        {"quad_rel_tol", num(q.rel_tol)},
        {"quad_abs_tol", num(q.abs_tol)},
        {"quad_max_subdivisions", q.max_subdivisions},
        {"quad_log_cutoff", num(q.log_cutoff)},
    };
    j["landmarks"] = {{"x_s", num(rec.landmarks.x_s)},
                      {"fb_roots", roots_json(rec.landmarks.fb_roots)},
                      {"x_crit", num(rec.landmarks.x_crit)},
                      {"x_star", num(rec.landmarks.x_star)}};

    json ex = nullptr;
    if (rec.exit) {
        ex = {{"b_star", threshold(rec.exit->b_star)}, {"k", num(rec.exit->k)}, {"diagnostics", diag_json(rec.exit->diag)}};
    }
    j["exit"] = ex;

    json ds{{"status", status_name(rec.ds_status)}};
    if (rec.double_stopping) {
        const auto& s = *rec.double_stopping;
        ds["a_star"] = threshold(s.a_star);
        ds["d_star"] = threshold(s.d_star);
        ds["b_star"] = threshold(s.b_star);
        ds["P"] = num(s.P);
        ds["Q"] = num(s.Q);
        ds["k"] = num(s.k);
        ds["diagnostics"] = {{"a_star", diag_json(s.a_diag)}, {"d_star", diag_json(s.d_diag)},
                             {"b_star", diag_json(s.b_diag)}};
    }
    if (!rec.ds_message.empty()) ds["message"] = rec.ds_message;
    j["double_stopping"] = ds;

    json sw{{"status", status_name(rec.sw_status)}};
    if (rec.switching) {
        const SwitchingSolution& s = *rec.switching;
        sw["theorem"] = theorem_label(s.report.chosen);
        if (s.recurrent()) {
            const Recurrent& r = s.rec();
            sw["regime"] = "recurrent";
            sw["a_tilde"] = threshold(r.a_tilde);
            sw["d_tilde"] = threshold(r.d_tilde);
            sw["b_tilde"] = threshold(r.b_tilde);
            sw["P_tilde"] = num(r.P_t);
            sw["K_tilde"] = num(r.K_t);
            sw["Q_tilde"] = num(r.Q_t);
            sw["diagnostics"] = {{"residual_qF", num(r.residual_qF)},
                                 {"residual_qG", num(r.residual_qG)},
                                 {"outer_iterations", r.outer_iterations}};
        } else {
            const NoEntry& n = s.no_entry();
            sw["regime"] = "no_entry";
            sw["b_star"] = threshold(n.b_star);
            sw["k"] = num(n.k);
        }
        sw["case_report"] = case_json(s.report);
    }
    if (!rec.sw_message.empty()) sw["message"] = rec.sw_message;
    j["switching"] = sw;
    j["seeds"] = rec.seeds;
    return j.dump(2) + "\n";
}

SolutionRecord record_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("record is not valid JSON: ") + e.what());
    }
    try {
        SolutionRecord rec;
        rec.tool_version = j.at("tool").at("version").get<std::string>();
        const json& in = j.at("inputs");
        rec.inputs.params = {get_num(in, "mu"), get_num(in, "theta"), get_num(in, "sigma"), get_num(in, "r")};
        rec.inputs.costs = {get_num(in, "c_b"), get_num(in, "c_s")};
        rec.inputs.quad.rel_tol = get_num(in, "quad_rel_tol");
        rec.inputs.quad.abs_tol = get_num(in, "quad_abs_tol");
        rec.inputs.quad.max_subdivisions = in.at("quad_max_subdivisions").get<unsigned>();
        rec.inputs.quad.log_cutoff = get_num(in, "quad_log_cutoff");

        const json& lm = j.at("landmarks");
        rec.landmarks = {get_num(lm, "x_s"), roots_from(lm.at("fb_roots")), get_num(lm, "x_crit"),
                         get_num(lm, "x_star")};

        if (!j.at("exit").is_null()) {
            const json& e = j.at("exit");
            rec.exit = ExitSolution{get_threshold(e, "b_star"), get_num(e, "k"), diag_from(e.at("diagnostics"))};
        }

        const json& ds = j.at("double_stopping");
        rec.ds_status = status_from(ds.at("status").get<std::string>());
        if (ds.contains("message")) rec.ds_message = ds.at("message").get<std::string>();
        if (ds.contains("d_star")) {
            DoubleStoppingSolution s{};
            s.a_star = get_threshold(ds, "a_star");
            s.d_star = get_threshold(ds, "d_star");
            s.b_star = get_threshold(ds, "b_star");
            s.P = get_num(ds, "P");
            s.Q = get_num(ds, "Q");
            s.k = get_num(ds, "k");
            const json& d = ds.at("diagnostics");
            s.a_diag = diag_from(d.at("a_star"));
            s.d_diag = diag_from(d.at("d_star"));
            s.b_diag = diag_from(d.at("b_star"));
            rec.double_stopping = s;
        }

        const json& sw = j.at("switching");
        rec.sw_status = status_from(sw.at("status").get<std::string>());
        if (sw.contains("message")) rec.sw_message = sw.at("message").get<std::string>();
        if (sw.contains("regime")) {
            SwitchingSolution s;
            s.report = case_from(sw.at("case_report"));
            if (sw.at("regime").get<std::string>() == "recurrent") {
                Recurrent r{};
                r.a_tilde = get_threshold(sw, "a_tilde");
                r.d_tilde = get_threshold(sw, "d_tilde");
                r.b_tilde = get_threshold(sw, "b_tilde");
                r.P_t = get_num(sw, "P_tilde");
                r.K_t = get_num(sw, "K_tilde");
                r.Q_t = get_num(sw, "Q_tilde");
                const json& d = sw.at("diagnostics");
                r.residual_qF = get_num(d, "residual_qF");
                r.residual_qG = get_num(d, "residual_qG");
                r.outer_iterations = d.at("outer_iterations").get<int>();
                s.regime = r;
            } else {
                s.regime = NoEntry{get_threshold(sw, "b_star"), get_num(sw, "k")};
            }
            rec.switching = s;
        }
        rec.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
        return rec;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed record: ") + e.what());
    }
}

}  // namespace xou
