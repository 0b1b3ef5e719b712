#pragma once

#include <goalest/estimator.hpp>
#include <goalest/localization.hpp>
#include <goalest/mesh.hpp>
#include <goalest/problems.hpp>
#include <goalest/vtk.hpp>

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace goalest {

inline constexpr int exit_ok = 0;
inline constexpr int exit_verification_failure = 2;
inline constexpr int exit_solver_failure = 3;

enum class StudyMode { Uniform, Adapt };

struct StudyConfig
{
    std::string problem = "manufactured";
    /// Unset means "every QoI the command supports".
    std::optional<QoI> qoi;
    double alpha = 1e-2;
    /// Number of meshes solved; the first is the initial mesh.
    int cycles = 4;
    StudyMode mode = StudyMode::Uniform;
    EstimatorChoice estimator = EstimatorChoice::Eta2;
    double target_factor = 2.0;
    std::filesystem::path out = "goalest_out";
    bool write_vtk = true;
    /// Uniform refinements applied to the initial mesh before a verification run.
    int initial_refinements = 0;
};

inline std::string_view to_string(StudyMode m) { return m == StudyMode::Uniform ? "uniform" : "adapt"; }
inline std::string_view to_string(EstimatorChoice e) { return e == EstimatorChoice::Eta1 ? "eta1" : "eta2"; }

inline StudyMode parse_mode(std::string_view s)
{
    if (s == "uniform") return StudyMode::Uniform;
    if (s == "adapt") return StudyMode::Adapt;
    throw Error("unknown mode '" + std::string(s) + "'");
}

inline EstimatorChoice parse_estimator(std::string_view s)
{
    if (s == "eta1") return EstimatorChoice::Eta1;
    if (s == "eta2") return EstimatorChoice::Eta2;
    throw Error("unknown estimator '" + std::string(s) + "'");
}

/// Apply one key=value setting to a config. Keys match the CLI flag names.
inline void apply_setting(StudyConfig& c, const std::string& key, const std::string& value)
{
    if (key == "problem") c.problem = value;
    else if (key == "qoi") c.qoi = parse_qoi(value);
    else if (key == "alpha") c.alpha = std::stod(value);
    else if (key == "cycles") c.cycles = std::stoi(value);
    else if (key == "mode") c.mode = parse_mode(value);
    else if (key == "estimator") c.estimator = parse_estimator(value);
    else if (key == "target-factor") c.target_factor = std::stod(value);
    else if (key == "out") c.out = value;
    else if (key == "vtk") c.write_vtk = (value == "1" || value == "true" || value == "yes");
    else if (key == "refine") c.initial_refinements = std::stoi(value);
    else throw Error("unknown config key '" + key + "'");
}

/// Plain-text config: one key=value per line, '#' starts a comment.
inline std::map<std::string, std::string> read_config_file(std::istream& is)
{
    std::map<std::string, std::string> kv;
    std::string line;
    int lineno = 0;
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    while (std::getline(is, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw Error("config line " + std::to_string(lineno) + ": expected key=value");
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return kv;
}

inline void validate(const StudyConfig& c)
{
    if (c.cycles < 1) throw Error("cycles must be >= 1");
    if (!(c.target_factor > 1.0)) throw Error("target-factor must be > 1");
    if (c.alpha < 0.0) throw Error("alpha must be >= 0");
    if (c.initial_refinements < 0) throw Error("refine must be >= 0");
}

inline std::string format_double(double v)
{
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Fixed-column CSV writer; every float is written with 17 significant digits.
class CsvWriter
{
public:
    CsvWriter(std::ostream& os, std::vector<std::string> columns) : os_(os), columns_(std::move(columns))
    {
        for (std::size_t i = 0; i < columns_.size(); ++i) os_ << (i ? "," : "") << columns_[i];
        os_ << '\n';
    }

    void row(const std::vector<std::string>& cells)
    {
        if (cells.size() != columns_.size()) throw Error("CsvWriter: wrong number of cells");
        for (std::size_t i = 0; i < cells.size(); ++i) os_ << (i ? "," : "") << cells[i];
        os_ << '\n';
        os_.flush();
    }

private:
    std::ostream& os_;
    std::vector<std::string> columns_;
};

inline nlohmann::json json_number(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

inline std::string flags_string(const EstimateReport& r)
{
    std::string s;
    auto add = [&](bool on, const char* name) {
        if (!on) return;
        if (!s.empty()) s += '|';
        s += name;
    };
    add(r.linear_qoi, "LINEAR_QOI");
    add(r.exact_coarse, "EXACT_COARSE");
    add(r.unreliable_denominator, "UNRELIABLE_DENOMINATOR");
    add(r.qoi_singular_points > 0, "QOI_SINGULAR_POINT");
    return s.empty() ? "none" : s;
}

inline nlohmann::json to_json(const EstimateReport& r)
{
    const double e = r.E_exact.value_or(not_computed);
    return {
        {"problem", r.problem},
        {"qoi", std::string(to_string(r.qoi))},
        {"alpha", r.alpha},
        {"n_el", r.n_elements},
        {"coarse_dofs", r.coarse_dofs},
        {"fine_dofs", r.fine_dofs},
        {"J_coarse", json_number(r.J_coarse)},
        {"J_fine", json_number(r.J_fine)},
        {"E", json_number(e)},
        {"E_h", json_number(r.E_h)},
        {"eta1", json_number(r.eta1)},
        {"eta2", json_number(r.eta2)},
        {"eta2_nores", json_number(r.eta2_nores)},
        {"eta_RL", json_number(r.eta_RL)},
        {"ERL_norm", json_number(r.ERL_norm)},
        {"theta_star", json_number(r.theta_star)},
        {"I_v", json_number(r.I_v)},
        {"eff_eta1_E", json_number(r.eff_eta1_E())},
        {"eff_eta2_E", json_number(r.eff_eta2_E())},
        {"eff_eta1_Eh", json_number(r.eff_eta1_Eh())},
        {"eff_eta2_Eh", json_number(r.eff_eta2_Eh())},
        {"corrected_eta1", json_number(r.corrected_eta1())},
        {"corrected_eta2", json_number(r.corrected_eta2())},
        {"newton_coarse", r.newton_coarse},
        {"newton_fine", r.newton_fine},
        {"flags", flags_string(r)},
    };
}

/// One row of a uniform or adaptive study.
struct StudyRow
{
    int cycle = 0;
    EstimateReport report;
    double reference_qoi = not_computed;
    double wall_time = 0.0;

    [[nodiscard]] double corrected_error_eta1() const { return reference_qoi - report.corrected_eta1(); }
    [[nodiscard]] double corrected_error_eta2() const { return reference_qoi - report.corrected_eta2(); }
};

inline const std::vector<std::string>& study_columns()
{
    static const std::vector<std::string> cols{
        "cycle",       "n_el",        "coarse_dofs",        "fine_dofs",          "J_coarse",   "J_fine",
        "E",           "E_h",         "eta1",               "eta2",               "eta2_nores", "eff_eta1_E",
        "eff_eta2_E",  "eff_eta1_Eh", "eff_eta2_Eh",        "err_corrected_eta1", "err_corrected_eta2",
        "ERL_norm",    "eta_RL",      "I_v",                "theta_star",         "newton_coarse",
        "newton_fine", "flags",       "wall_time"};
    return cols;
}

inline std::vector<std::string> study_cells(const StudyRow& row)
{
    const auto& r = row.report;
    const auto f = format_double;
    return {std::to_string(row.cycle),
            std::to_string(r.n_elements),
            std::to_string(r.coarse_dofs),
            std::to_string(r.fine_dofs),
            f(r.J_coarse),
            f(r.J_fine),
            f(r.E_exact.value_or(not_computed)),
            f(r.E_h),
            f(r.eta1),
            f(r.eta2),
            f(r.eta2_nores),
            f(r.eff_eta1_E()),
            f(r.eff_eta2_E()),
            f(r.eff_eta1_Eh()),
            f(r.eff_eta2_Eh()),
            f(row.corrected_error_eta1()),
            f(row.corrected_error_eta2()),
            f(r.ERL_norm),
            f(r.eta_RL),
            f(r.I_v),
            f(r.theta_star),
            std::to_string(r.newton_coarse),
            std::to_string(r.newton_fine),
            flags_string(r),
            f(row.wall_time)};
}

using StudyObserver = std::function<void(const StudyRow&, const Mesh&, const EstimateFields&, const IndicatorField*,
                                         const SizeFieldResult*)>;

inline std::shared_ptr<const Mesh> initial_mesh(int refinements = 0)
{
    Mesh m = generate_initial_mesh();
    for (int i = 0; i < refinements; ++i) m = uniform_refine(m);
    return std::make_shared<const Mesh>(std::move(m));
}

/// Uniform or adaptive study; the observer sees every row as soon as it is computed.
inline std::vector<StudyRow> run_study(const StudyConfig& config, const StudyObserver& observe = {})
{
    validate(config);
    const QoI qoi = config.qoi.value_or(QoI::J2);
    const ProblemDefinition problem = make_problem(config.problem, config.alpha);
    std::vector<StudyRow> rows;
    auto mesh = initial_mesh();

    for (int cycle = 0; cycle < config.cycles; ++cycle) {
        const auto t0 = std::chrono::steady_clock::now();
        StudyRow row;
        row.cycle = cycle;
        row.reference_qoi = problem.qoi_value(qoi);
        std::optional<AdaptiveCycleResult> adapted;
        EstimationResult est;
        if (config.mode == StudyMode::Adapt) {
            adapted = adaptive_cycle(mesh, problem, qoi, config.estimator, config.target_factor);
            est = std::move(adapted->estimate);
        } else {
            const FunctionSpace coarse(mesh, 1);
            const FunctionSpace fine(mesh, 2);
            est = run_estimation_pass(coarse, fine, problem, qoi);
        }
        row.report = est.report;
        row.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        rows.push_back(row);
        if (observe)
            observe(row, *mesh, est.fields, adapted ? &adapted->indicators : nullptr,
                    adapted ? &adapted->size_field : nullptr);
        if (cycle + 1 == config.cycles) break;
        mesh = adapted ? adapted->mesh : std::make_shared<const Mesh>(uniform_refine(*mesh));
    }
    return rows;
}

/// Observed convergence rate of |E| between two rows, measured against coarse dofs
/// and reported in terms of the mesh size (h ~ dofs^{-1/2}).
inline double observed_rate(const StudyRow& coarse, const StudyRow& fine)
{
    const double e0 = std::abs(coarse.report.E_exact.value_or(not_computed));
    const double e1 = std::abs(fine.report.E_exact.value_or(not_computed));
    const double n0 = static_cast<double>(coarse.report.coarse_dofs);
    const double n1 = static_cast<double>(fine.report.coarse_dofs);
    return -2.0 * std::log(e1 / e0) / std::log(n1 / n0);
}

struct VerifyAdjointRow
{
    double alpha = 0.0;
    AdjointVerification result;
    int newton_coarse = 0;
    int newton_fine = 0;
};

struct VerifyEta2Row
{
    EstimateReport report;
    /// f(theta) at theta = k/9, k = 0..9
    std::vector<std::pair<double, double>> theta_trace;
};

inline std::vector<VerifyAdjointRow> run_verify_adjoint(const StudyConfig& config)
{
    validate(config);
    const QoI qoi = config.qoi.value_or(QoI::J1);
    if (qoi != QoI::J1) throw Error("verify-adjoint requires the linear QoI j1");
    const auto mesh = initial_mesh(config.initial_refinements);
    const FunctionSpace coarse(mesh, 1);
    const FunctionSpace fine(mesh, 2);
    std::vector<VerifyAdjointRow> rows;
    for (double alpha : alpha_grid) {
        const ProblemDefinition problem = make_problem(config.problem, alpha);
        const auto uc = newton_primal(coarse, problem, coarse.zeros());
        const auto uf = newton_primal(fine, problem, prolong(coarse, uc.u, fine));
        rows.push_back({alpha, verify_adjoint(coarse, fine, problem, uc.u, uf.u, qoi), uc.iterations, uf.iterations});
    }
    return rows;
}

inline std::vector<VerifyEta2Row> run_verify_eta2(const StudyConfig& config)
{
    validate(config);
    std::vector<QoI> qois{QoI::J2, QoI::J3, QoI::J4};
    if (config.qoi) {
        if (*config.qoi == QoI::J1) throw Error("verify-eta2 requires a nonlinear QoI (j2, j3, j4)");
        qois = {*config.qoi};
    }
    const auto mesh = initial_mesh(config.initial_refinements);
    const FunctionSpace coarse(mesh, 1);
    const FunctionSpace fine(mesh, 2);
    const ProblemDefinition problem = make_problem(config.problem, config.alpha);
    std::vector<VerifyEta2Row> rows;
    for (QoI q : qois) {
        auto est = run_estimation_pass(coarse, fine, problem, q);
        VerifyEta2Row row;
        row.report = est.report;
        const CoefficientVector e = est.fields.u_fine - est.fields.u_coarse_fine;
        for (int k = 0; k < 10; ++k) {
            const double theta = k / 9.0;
            row.theta_trace.emplace_back(
                theta, theta_function(fine, q, est.report.E_h, est.fields.u_coarse_fine, e, theta).value);
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

namespace detail {

inline std::ofstream open_output(const std::filesystem::path& dir, const std::string& name)
{
    std::filesystem::create_directories(dir);
    std::ofstream os(dir / name);
    if (!os) throw Error("cannot open " + (dir / name).string());
    return os;
}

inline nlohmann::json config_json(const StudyConfig& c, std::string_view command)
{
    return {{"command", command},
            {"problem", c.problem},
            {"qoi", c.qoi ? std::string(to_string(*c.qoi)) : std::string("all")},
            {"alpha", c.alpha},
            {"cycles", c.cycles},
            {"mode", std::string(to_string(c.mode))},
            {"estimator", std::string(to_string(c.estimator))},
            {"target_factor", c.target_factor}};
}

} // namespace detail

/// Adjoint verification over the alpha sweep; exit code 2 if any |I_v - 1| > 1e-6.
inline int cmd_verify_adjoint(const StudyConfig& config, std::ostream& log)
{
    const auto rows = run_verify_adjoint(config);
    auto csv_file = detail::open_output(config.out, "report.csv");
    CsvWriter csv(csv_file, {"alpha", "ERL_norm", "E_h", "eta1", "eta_RL", "eta1_over_E_h", "I_v", "newton_coarse",
                             "newton_fine", "status"});
    nlohmann::json js = detail::config_json(config, "verify-adjoint");
    js["rows"] = nlohmann::json::array();
    bool ok = true;
    for (const auto& r : rows) {
        const auto& v = r.result;
        const std::string status = v.indeterminate ? "INDETERMINATE" : (v.passed() ? "PASS" : "FAIL");
        if (!v.indeterminate && !v.passed()) ok = false;
        csv.row({format_double(r.alpha), format_double(v.ERL_norm), format_double(v.E_h), format_double(v.eta1),
                 format_double(v.eta_RL), format_double(v.eta1 / v.E_h), format_double(v.I_v),
                 std::to_string(r.newton_coarse), std::to_string(r.newton_fine), status});
        js["rows"].push_back({{"alpha", r.alpha},
                              {"ERL_norm", json_number(v.ERL_norm)},
                              {"E_h", json_number(v.E_h)},
                              {"eta1", json_number(v.eta1)},
                              {"eta_RL", json_number(v.eta_RL)},
                              {"eta1_over_E_h", json_number(v.eta1 / v.E_h)},
                              {"I_v", json_number(v.I_v)},
                              {"newton_coarse", r.newton_coarse},
                              {"newton_fine", r.newton_fine},
                              {"status", status}});
        char line[256];
        std::snprintf(line, sizeof line, "alpha=%-8.1e |E_RL|=%.4e E_h=%.4e eta1=%.4e eta_RL=%.4e I_v=%.10f %s\n",
                      r.alpha, v.ERL_norm, v.E_h, v.eta1, v.eta_RL, v.I_v, status.c_str());
        log << line;
    }
    js["passed"] = ok;
    detail::open_output(config.out, "report.json") << js.dump(2) << '\n';
    return ok ? exit_ok : exit_verification_failure;
}

/// eta2 exactness check for the nonlinear QoIs; exit code 2 if any |eta2/E_h - 1| > 1e-6.
inline int cmd_verify_eta2(const StudyConfig& config, std::ostream& log)
{
    const auto rows = run_verify_eta2(config);
    auto csv_file = detail::open_output(config.out, "report.csv");
    CsvWriter csv(csv_file, {"qoi", "E_h", "eta1", "eta2", "eta1_over_E_h", "eta2_over_E_h", "theta_star",
                             "ERL_norm", "flags", "status"});
    auto trace_file = detail::open_output(config.out, "theta_trace.csv");
    CsvWriter trace(trace_file, {"qoi", "theta", "f_theta"});
    nlohmann::json js = detail::config_json(config, "verify-eta2");
    js["rows"] = nlohmann::json::array();
    bool ok = true;
    for (const auto& row : rows) {
        const auto& r = row.report;
        const bool pass = std::abs(r.eff_eta2_Eh() - 1.0) <= 1e-6;
        ok = ok && pass;
        const std::string status = pass ? "PASS" : "FAIL";
        const std::string q(to_string(r.qoi));
        csv.row({q, format_double(r.E_h), format_double(r.eta1), format_double(r.eta2),
                 format_double(r.eff_eta1_Eh()), format_double(r.eff_eta2_Eh()), format_double(r.theta_star),
                 format_double(r.ERL_norm), flags_string(r), status});
        auto j = to_json(r);
        j["status"] = status;
        j["theta_trace"] = nlohmann::json::array();
        for (const auto& [t, f] : row.theta_trace) {
            trace.row({q, format_double(t), format_double(f)});
            j["theta_trace"].push_back({{"theta", t}, {"f", json_number(f)}});
        }
        js["rows"].push_back(j);
        char line[256];
        std::snprintf(line, sizeof line, "%s: E_h=%.4e eta1=%.4e eta2=%.4e eta1/E_h=%.4e eta2/E_h=%.12f theta*=%.12f %s\n",
                      q.c_str(), r.E_h, r.eta1, r.eta2, r.eff_eta1_Eh(), r.eff_eta2_Eh(), r.theta_star,
                      status.c_str());
        log << line;
    }
    js["passed"] = ok;
    detail::open_output(config.out, "report.json") << js.dump(2) << '\n';
    return ok ? exit_ok : exit_verification_failure;
}

/// Uniform or adaptive study: report.csv (one row per cycle), report.json, mesh_cycle_k.vtk.
inline int cmd_study(const StudyConfig& config, std::ostream& log)
{
    auto csv_file = detail::open_output(config.out, "report.csv");
    CsvWriter csv(csv_file, study_columns());
    nlohmann::json js = detail::config_json(config, "study");
    js["rows"] = nlohmann::json::array();
    auto flush_json = [&] { detail::open_output(config.out, "report.json") << js.dump(2) << '\n'; };

    auto observe = [&](const StudyRow& row, const Mesh& mesh, const EstimateFields& fields,
                       const IndicatorField* indicators, const SizeFieldResult* size) {
        csv.row(study_cells(row));
        auto j = to_json(row.report);
        j["cycle"] = row.cycle;
        j["err_corrected_eta1"] = json_number(row.corrected_error_eta1());
        j["err_corrected_eta2"] = json_number(row.corrected_error_eta2());
        j["wall_time"] = row.wall_time;
        js["rows"].push_back(j);
        flush_json();
        char line[256];
        std::snprintf(line, sizeof line, "cycle %d: n_el=%zu dofs=%zu E=%.6e eta1/E=%.6f eta2/E=%.6f (%.2fs)\n",
                      row.cycle, row.report.n_elements, row.report.coarse_dofs,
                      row.report.E_exact.value_or(not_computed), row.report.eff_eta1_E(), row.report.eff_eta2_E(),
                      row.wall_time);
        log << line;
        if (!config.write_vtk) return;
        std::vector<VtkField> point{{"u_coarse", std::vector<double>(fields.u_coarse.data(),
                                                                     fields.u_coarse.data() + fields.u_coarse.size())}};
        std::vector<VtkField> cell;
        if (indicators) {
            point.push_back({"vertex_indicator", indicators->vertex});
            cell.push_back({"element_indicator", indicators->element});
        }
        if (size) cell.push_back({"size_ratio", size->ratio});
        write_vtk((config.out / ("mesh_cycle_" + std::to_string(row.cycle) + ".vtk")).string(), mesh, point, cell);
    };

    try {
        run_study(config, observe);
    } catch (...) {
        js["failed"] = true;
        flush_json();
        throw;
    }
    return exit_ok;
}

} // namespace goalest
