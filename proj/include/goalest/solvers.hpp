#pragma once

#include <goalest/assembly.hpp>
#include <goalest/error.hpp>
#include <goalest/sparse.hpp>

#include <Eigen/SparseLU>

#include <cmath>
#include <limits>
#include <memory>
#include <ostream>
#include <vector>

namespace goalest {

struct SolverSettings
{
    double nonlinear_abs_tol = 1e-10;
    double linear_abs_tol = 1e-12;
    int max_newton = 50;
    /// Iterative-refinement sweeps after the direct solve.
    int max_linear_iters = 10;
    double theta_tol = 1e-12;
    int theta_max_iters = 50;
    /// Diagnostics channel: per-iteration residual norms and theta iterates.
    std::ostream* log = nullptr;
};

struct LinearSolveReport
{
    double residual = 0.0;
    /// Floating-point floor eps * (|A| |x| + |b|) of the residual evaluation.
    double roundoff_floor = 0.0;
    int refinement_steps = 0;
    bool converged = false;
};

/// Sparse LU factorization of A (or of A^T) with iterative refinement on the
/// original operator. Convergence means ||A x - b||_2 <= tolerance, or, when
/// the residual can no longer be resolved in double precision, that it has
/// reached the rounding floor of its own evaluation.
class LinearSolver
{
public:
    LinearSolver(const SparseMatrix& a, bool transpose, const SolverSettings& settings = {})
        : a_(&a), transpose_(transpose), settings_(settings)
    {
        Eigen::SparseMatrix<double> m = transpose ? Eigen::SparseMatrix<double>(a.transpose().to_eigen())
                                                  : Eigen::SparseMatrix<double>(a.to_eigen());
        m.makeCompressed();
        lu_ = std::make_unique<Eigen::SparseLU<Eigen::SparseMatrix<double>>>();
        lu_->analyzePattern(m);
        lu_->factorize(m);
        if (lu_->info() != Eigen::Success) throw SolverError("LinearSolver: factorization failed", -1.0);
    }

    [[nodiscard]] CoefficientVector solve(const CoefficientVector& b, LinearSolveReport* report = nullptr) const
    {
        CoefficientVector x = lu_->solve(b);
        LinearSolveReport rep;
        CoefficientVector r = b - apply(x);
        rep.residual = r.norm();
        for (int it = 0; it < settings_.max_linear_iters && rep.residual > settings_.linear_abs_tol; ++it) {
            const CoefficientVector x_new = x + lu_->solve(r);
            const CoefficientVector r_new = b - apply(x_new);
            const double res_new = r_new.norm();
            if (!(res_new < rep.residual)) break;
            x = x_new;
            r = r_new;
            rep.residual = res_new;
            rep.refinement_steps = it + 1;
        }
        rep.roundoff_floor = roundoff_floor(x, b);
        rep.converged = rep.residual <= settings_.linear_abs_tol || rep.residual <= rep.roundoff_floor;
        if (settings_.log)
            *settings_.log << "linear solve: residual " << rep.residual << " floor " << rep.roundoff_floor
                           << " refinements " << rep.refinement_steps << '\n';
        if (report) *report = rep;
        if (!rep.converged || !std::isfinite(rep.residual))
            throw SolverError("linear solve did not reach its tolerance", rep.residual);
        return x;
    }

    [[nodiscard]] CoefficientVector apply(const CoefficientVector& x) const
    {
        return transpose_ ? a_->multiply_transpose(x) : a_->multiply(x);
    }

private:
    /// Bound on the rounding error of evaluating b - A x in double precision:
    /// gamma_n * (|A| |x| + |b|) with n the longest row.
    [[nodiscard]] double roundoff_floor(const CoefficientVector& x, const CoefficientVector& b) const
    {
        const auto offs = a_->row_offsets();
        const auto cols = a_->columns();
        const auto vals = a_->values();
        CoefficientVector ax = CoefficientVector::Zero(b.size());
        int longest = 0;
        for (std::size_t i = 0; i + 1 < offs.size(); ++i) {
            longest = std::max(longest, offs[i + 1] - offs[i]);
            for (int k = offs[i]; k < offs[i + 1]; ++k) {
                const auto row = static_cast<Eigen::Index>(transpose_ ? cols[k] : static_cast<int>(i));
                const auto col = static_cast<Eigen::Index>(transpose_ ? static_cast<int>(i) : cols[k]);
                ax[row] += std::abs(vals[k] * x[col]);
            }
        }
        const double eps = std::numeric_limits<double>::epsilon();
        return (longest + 1) * eps * (ax + b.cwiseAbs()).norm();
    }

    const SparseMatrix* a_;
    bool transpose_;
    SolverSettings settings_;
    std::unique_ptr<Eigen::SparseLU<Eigen::SparseMatrix<double>>> lu_;
};

/// Solve A x = b, or A^T x = b when transpose is set.
inline CoefficientVector linear_solve(const SparseMatrix& a, const CoefficientVector& b, bool transpose,
                                      const SolverSettings& settings = {}, LinearSolveReport* report = nullptr)
{
    if (static_cast<std::size_t>(b.size()) != a.rows()) throw Error("linear_solve: size mismatch");
    return LinearSolver(a, transpose, settings).solve(b, report);
}

struct NewtonResult
{
    CoefficientVector u;
    /// Number of Newton updates applied.
    int iterations = 0;
    double residual_norm = 0.0;
    std::vector<double> history;
};

/// Newton's method for R(u) = 0 until ||R||_2 < nonlinear_abs_tol.
inline NewtonResult newton_primal(const FunctionSpace& space, const ProblemDefinition& problem,
                                  const CoefficientVector& initial, const SolverSettings& settings = {})
{
    NewtonResult out;
    out.u = initial;
    space.constrain(out.u);
    SparseMatrix jac(space);
    int growth = 0;
    for (;;) {
        const CoefficientVector r = assemble_residual(space, problem, out.u);
        const double norm = r.norm();
        if (!std::isfinite(norm)) throw SolverError("newton: non-finite residual", norm);
        if (!out.history.empty()) growth = norm > out.history.back() ? growth + 1 : 0;
        out.history.push_back(norm);
        out.residual_norm = norm;
        if (settings.log) *settings.log << "newton " << out.iterations << ": |R| = " << norm << '\n';
        if (norm < settings.nonlinear_abs_tol) return out;
        if (growth >= 5) throw SolverError("newton: residual grew for 5 consecutive iterations", norm);
        if (out.iterations >= settings.max_newton) throw SolverError("newton: iteration limit reached", norm);
        assemble_jacobian(space, problem, out.u, jac);
        out.u -= linear_solve(jac, r, false, settings);
        ++out.iterations;
    }
}

struct ThetaResult
{
    double theta = 0.5;
    CoefficientVector u_star;
    /// f(theta) at the returned theta.
    double residual = 0.0;
    int iterations = 0;
    /// The QoI has no curvature along e^h: f is constant and theta is set to 1/2.
    bool linear_qoi = false;
    bool used_bisection = false;
};

/// f(theta) = E^h - dJ/du(u_coarse + theta e) . e and f'(theta) = -e^T H e.
struct ThetaFunction
{
    double value;
    double derivative;
};

inline ThetaFunction theta_function(const FunctionSpace& space, QoI qoi, double error_fine,
                                    const CoefficientVector& u_coarse, const CoefficientVector& e, double theta)
{
    const auto line = qoi_along_line(space, qoi, u_coarse, e, theta);
    return {error_fine - line.first, -line.second};
}

/// Find theta in [0,1] with dJ/du(u_coarse + theta e) . e = E^h (mean-value state).
/// Newton from theta = 1/2, falling back to bisection when an iterate leaves [0,1].
inline ThetaResult solve_theta(const FunctionSpace& space, QoI qoi, double error_fine,
                               const CoefficientVector& u_coarse, const CoefficientVector& e,
                               const SolverSettings& settings = {})
{
    ThetaResult out;
    const double tol = settings.theta_tol * std::max(1.0, std::abs(error_fine));
    auto f = [&](double t) { return theta_function(space, qoi, error_fine, u_coarse, e, t); };
    auto finish = [&](double t, double fv) {
        out.theta = t;
        out.residual = fv;
        out.u_star = u_coarse + t * e;
        return out;
    };

    const auto mid = f(0.5);
    if (mid.derivative == 0.0 && f(0.0).derivative == 0.0 && f(1.0).derivative == 0.0) {
        out.linear_qoi = true;
        return finish(0.5, mid.value);
    }

    double theta = 0.5;
    auto cur = mid;
    for (; out.iterations < settings.theta_max_iters; ++out.iterations) {
        if (settings.log) *settings.log << "theta " << out.iterations << ": " << theta << " f = " << cur.value << '\n';
        if (std::abs(cur.value) <= tol) return finish(theta, cur.value);
        if (std::abs(cur.derivative) < 1e-14 * std::abs(cur.value)) break;
        const double next = theta - cur.value / cur.derivative;
        if (!(next >= 0.0 && next <= 1.0)) break;
        if (std::abs(next - theta) <= 4.0 * std::numeric_limits<double>::epsilon()) {
            // converged to working precision; |f| is at its rounding floor
            theta = next;
            cur = f(theta);
            return finish(theta, cur.value);
        }
        theta = next;
        cur = f(theta);
    }

    // bisection on [0,1]: locate a sign change on a coarse grid first
    out.used_bisection = true;
    constexpr int samples = 16;
    double lo = 0.0, flo = f(0.0).value;
    double hi = -1.0, fhi = 0.0;
    for (int k = 1; k <= samples; ++k) {
        const double t = static_cast<double>(k) / samples;
        const double ft = f(t).value;
        if (ft == 0.0) return finish(t, ft);
        if ((flo < 0.0) != (ft < 0.0)) {
            hi = t;
            fhi = ft;
            break;
        }
        lo = t;
        flo = ft;
    }
    if (hi < 0.0) throw SolverError("solve_theta: no sign change of f on [0,1]", std::abs(cur.value));
    for (int it = 0; it < 200; ++it) {
        const double m = 0.5 * (lo + hi);
        const double fm = f(m).value;
        if (std::abs(fm) <= tol || hi - lo <= 2.0 * std::numeric_limits<double>::epsilon()) return finish(m, fm);
        if ((flo < 0.0) == (fm < 0.0)) {
            lo = m;
            flo = fm;
        } else {
            hi = m;
            fhi = fm;
        }
    }
    (void)fhi;
    throw SolverError("solve_theta: bisection failed", std::abs(flo));
}

} // namespace goalest
