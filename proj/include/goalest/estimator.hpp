#pragma once

#include <goalest/assembly.hpp>
#include <goalest/problems.hpp>
#include <goalest/solvers.hpp>
#include <goalest/space.hpp>

#include <cmath>
#include <limits>
#include <optional>
#include <string>

namespace goalest {

inline constexpr double not_computed = std::numeric_limits<double>::quiet_NaN();

/// All scalars of one two-level estimation pass.
struct EstimateReport
{
    std::string problem;
    QoI qoi = QoI::J1;
    double alpha = 0.0;
    std::size_t n_elements = 0;
    std::size_t coarse_dofs = 0;
    std::size_t fine_dofs = 0;

    double J_coarse = not_computed;   ///< J^H(u^H)
    double J_fine = not_computed;     ///< J^h(u^h)
    double E_h = not_computed;        ///< J^h(u^h) - J^h(u^H_h)
    std::optional<double> E_exact;    ///< J(u) - J^H(u^H), exact or against a reference value
    double eta1 = not_computed;
    double eta2 = not_computed;
    double eta2_nores = not_computed; ///< -z* . R^h(u^H_h), diagnostic only
    double eta_RL = not_computed;     ///< -z^h . E^R_L
    double ERL_norm = not_computed;
    double qoi_linearization_error = not_computed; ///< E^h - dJ/du|_{u^H_h} . e^h
    double theta_star = not_computed;
    double theta_residual = not_computed;
    double I_v = not_computed;

    int newton_coarse = 0;
    int newton_fine = 0;

    bool linear_qoi = false;
    bool exact_coarse = false;
    bool unreliable_denominator = false;
    int qoi_singular_points = 0;

    [[nodiscard]] double eff_eta1_Eh() const { return eta1 / E_h; }
    [[nodiscard]] double eff_eta2_Eh() const { return eta2 / E_h; }
    [[nodiscard]] double eff_eta1_E() const { return E_exact ? eta1 / *E_exact : not_computed; }
    [[nodiscard]] double eff_eta2_E() const { return E_exact ? eta2 / *E_exact : not_computed; }
    [[nodiscard]] double corrected_eta1() const { return J_coarse + eta1; }
    [[nodiscard]] double corrected_eta2() const { return J_coarse + eta2; }
};

/// Vectors produced by a pass; kept for localization and diagnostics.
struct EstimateFields
{
    CoefficientVector u_coarse;       ///< u^H
    CoefficientVector u_coarse_fine;  ///< u^H_h
    CoefficientVector u_fine;         ///< u^h
    CoefficientVector residual;       ///< R^h(u^H_h)
    CoefficientVector residual_linearization_error;
    CoefficientVector z_h;
    CoefficientVector z_star;
    CoefficientVector z_star_star;
    CoefficientVector u_star;
};

struct EstimationResult
{
    EstimateReport report;
    EstimateFields fields;
};

struct Eta1Result
{
    double eta1;
    CoefficientVector z_h;
};

/// Adjoint-weighted residual: solve [dR/du]^T z = [dJ/du]^T at u^H_h, eta1 = -z . R.
inline Eta1Result compute_eta1(const FunctionSpace& fine, const ProblemDefinition& problem,
                               const CoefficientVector& u_coarse_fine, QoI qoi, const SolverSettings& settings = {})
{
    const CoefficientVector r = assemble_residual(fine, problem, u_coarse_fine);
    const SparseMatrix jac = assemble_jacobian(fine, problem, u_coarse_fine);
    const auto g = assemble_qoi(fine, qoi, u_coarse_fine);
    CoefficientVector z = linear_solve(jac, g.gradient, true, settings);
    return {-z.dot(r), std::move(z)};
}

namespace detail {

/// E^R_L = -R - J e, the Taylor remainder of the residual with R^h(u^h) taken as zero.
inline CoefficientVector residual_remainder(const SparseMatrix& jac, const CoefficientVector& residual,
                                            const CoefficientVector& e)
{
    return -residual - jac.multiply(e);
}

} // namespace detail

/// Residual linearization error about u^H_h:
/// E^R_L = -R^h(u^H_h) - [dR/du|_{u^H_h}] (u^h - u^H_h), using R^h(u^h) = 0.
inline CoefficientVector compute_residual_linearization_error(const FunctionSpace& fine,
                                                              const ProblemDefinition& problem,
                                                              const CoefficientVector& u_coarse_fine,
                                                              const CoefficientVector& u_fine)
{
    const SparseMatrix jac = assemble_jacobian(fine, problem, u_coarse_fine);
    return detail::residual_remainder(jac, assemble_residual(fine, problem, u_coarse_fine), u_fine - u_coarse_fine);
}

/// (eta1 + eta^R_L) / E^h for a given adjoint; equals one for a correct adjoint of a linear QoI.
inline double adjoint_verification_ratio(double error_fine, const CoefficientVector& z,
                                         const CoefficientVector& residual,
                                         const CoefficientVector& residual_linearization_error)
{
    const double eta1 = -z.dot(residual);
    const double eta_rl = -z.dot(residual_linearization_error);
    return (eta1 + eta_rl) / error_fine;
}

struct AdjointVerification
{
    double I_v = not_computed;
    double eta1 = not_computed;
    double eta_RL = not_computed;
    double E_h = not_computed;
    double ERL_norm = not_computed;
    bool indeterminate = false;

    [[nodiscard]] bool passed(double tol = 1e-6) const { return !indeterminate && std::abs(I_v - 1.0) <= tol; }
};

/// Adjoint check for a linear QoI from primal data only.
inline AdjointVerification verify_adjoint(const FunctionSpace& coarse, const FunctionSpace& fine,
                                          const ProblemDefinition& problem, const CoefficientVector& u_coarse,
                                          const CoefficientVector& u_fine, QoI qoi,
                                          const SolverSettings& settings = {})
{
    AdjointVerification v;
    const CoefficientVector u_hH = prolong(coarse, u_coarse, fine);
    const double j_fine = qoi_value(fine, qoi, u_fine);
    v.E_h = j_fine - qoi_value(fine, qoi, u_hH);
    const auto [eta1, z] = compute_eta1(fine, problem, u_hH, qoi, settings);
    const CoefficientVector erl = compute_residual_linearization_error(fine, problem, u_hH, u_fine);
    v.eta1 = eta1;
    v.eta_RL = -z.dot(erl);
    v.ERL_norm = erl.norm();
    v.indeterminate = std::abs(v.E_h) < 1e-14 * std::abs(j_fine);
    v.I_v = (v.eta1 + v.eta_RL) / v.E_h;
    return v;
}

struct Eta2Result
{
    double eta2 = not_computed;
    double eta2_nores = not_computed;
    CoefficientVector z_star_star;
    CoefficientVector z_star;
    ThetaResult theta;
    bool exact_coarse = false;
};

namespace detail {

inline Eta2Result eta2_from_parts(const FunctionSpace& fine, QoI qoi, const LinearSolver& adjoint_solver,
                                  const CoefficientVector& residual, const CoefficientVector& erl,
                                  const CoefficientVector& u_coarse_fine, const CoefficientVector& e,
                                  double error_fine, const SolverSettings& settings)
{
    Eta2Result out;
    out.theta = solve_theta(fine, qoi, error_fine, u_coarse_fine, e, settings);
    const auto g_star = assemble_qoi(fine, qoi, out.theta.u_star);
    out.z_star = adjoint_solver.solve(g_star.gradient);
    const double rr = residual.squaredNorm();
    if (rr < 1e-28) {
        out.exact_coarse = true;
        out.z_star_star = out.z_star;
    } else {
        out.z_star_star = out.z_star + (out.z_star.dot(erl) / rr) * residual;
    }
    out.eta2 = -out.z_star_star.dot(residual);
    out.eta2_nores = -out.z_star.dot(residual);
    return out;
}

} // namespace detail

/// Linearization-error-free estimate: theta solve, modified adjoint z*, least-squares
/// correction z**, eta2 = -z** . R^h(u^H_h).
inline Eta2Result compute_eta2(const FunctionSpace& fine, const ProblemDefinition& problem,
                               const CoefficientVector& u_coarse_fine, const CoefficientVector& u_fine, QoI qoi,
                               const SolverSettings& settings = {})
{
    const CoefficientVector r = assemble_residual(fine, problem, u_coarse_fine);
    const SparseMatrix jac = assemble_jacobian(fine, problem, u_coarse_fine);
    const CoefficientVector e = u_fine - u_coarse_fine;
    const CoefficientVector erl = detail::residual_remainder(jac, r, e);
    const double error_fine = qoi_value(fine, qoi, u_fine) - qoi_value(fine, qoi, u_coarse_fine);
    const LinearSolver adjoint(jac, true, settings);
    return detail::eta2_from_parts(fine, qoi, adjoint, r, erl, u_coarse_fine, e, error_fine, settings);
}

struct PassOptions
{
    /// Solve the fine nonlinear problem and compute eta2 and the verification quantities.
    bool with_eta2 = true;
    SolverSettings solver;
};

/// Coarse solve, prolongation, fine solve, eta1, E^R_L, theta, z*, z**, eta2.
inline EstimationResult run_estimation_pass(const FunctionSpace& coarse, const FunctionSpace& fine,
                                            const ProblemDefinition& problem, QoI qoi,
                                            const PassOptions& options = {})
{
    const auto& settings = options.solver;
    EstimationResult res;
    auto& rep = res.report;
    auto& fld = res.fields;
    rep.problem = problem.name;
    rep.qoi = qoi;
    rep.alpha = problem.alpha;
    rep.n_elements = coarse.mesh().num_triangles();
    rep.coarse_dofs = coarse.dof_count();
    rep.fine_dofs = fine.dof_count();

    const auto coarse_solve = newton_primal(coarse, problem, coarse.zeros(), settings);
    rep.newton_coarse = coarse_solve.iterations;
    fld.u_coarse = coarse_solve.u;
    fld.u_coarse_fine = prolong(coarse, fld.u_coarse, fine);
    rep.J_coarse = qoi_value(coarse, qoi, fld.u_coarse);
    rep.E_exact = problem.qoi_value(qoi) - rep.J_coarse;

    fld.residual = assemble_residual(fine, problem, fld.u_coarse_fine);
    const SparseMatrix jac = assemble_jacobian(fine, problem, fld.u_coarse_fine);
    const LinearSolver adjoint(jac, true, settings);
    const auto g = assemble_qoi(fine, qoi, fld.u_coarse_fine);
    rep.qoi_singular_points = g.singular_points;
    fld.z_h = adjoint.solve(g.gradient);
    rep.eta1 = -fld.z_h.dot(fld.residual);

    if (!options.with_eta2) return res;

    const auto fine_solve = newton_primal(fine, problem, fld.u_coarse_fine, settings);
    rep.newton_fine = fine_solve.iterations;
    fld.u_fine = fine_solve.u;
    rep.J_fine = qoi_value(fine, qoi, fld.u_fine);
    const double j_coarse_on_fine = qoi_value(fine, qoi, fld.u_coarse_fine);
    rep.E_h = rep.J_fine - j_coarse_on_fine;
    rep.unreliable_denominator = std::abs(rep.E_h) < 1e-12 * std::abs(rep.J_fine);

    const CoefficientVector e = fld.u_fine - fld.u_coarse_fine;
    fld.residual_linearization_error = detail::residual_remainder(jac, fld.residual, e);
    rep.ERL_norm = fld.residual_linearization_error.norm();
    rep.eta_RL = -fld.z_h.dot(fld.residual_linearization_error);
    rep.I_v = (rep.eta1 + rep.eta_RL) / rep.E_h;
    rep.qoi_linearization_error = rep.E_h - g.gradient.dot(e);

    auto eta2 = detail::eta2_from_parts(fine, qoi, adjoint, fld.residual, fld.residual_linearization_error,
                                        fld.u_coarse_fine, e, rep.E_h, settings);
    rep.eta2 = eta2.eta2;
    rep.eta2_nores = eta2.eta2_nores;
    rep.theta_star = eta2.theta.theta;
    rep.theta_residual = eta2.theta.residual;
    rep.linear_qoi = eta2.theta.linear_qoi;
    rep.exact_coarse = eta2.exact_coarse;
    fld.z_star = std::move(eta2.z_star);
    fld.z_star_star = std::move(eta2.z_star_star);
    fld.u_star = std::move(eta2.theta.u_star);
    return res;
}

} // namespace goalest
