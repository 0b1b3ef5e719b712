#pragma once

#include <goalest/autodiff.hpp>
#include <goalest/problems.hpp>
#include <goalest/space.hpp>
#include <goalest/sparse.hpp>

#include <array>
#include <span>
#include <vector>

namespace goalest {

// Sign convention: R(u) = N(u; phi_i) - L(phi_i), so the primal problem is R(u) = 0.

namespace detail {

template <typename S>
using LocalArray = std::array<S, ElementValues::max_dofs>;

inline std::array<double, ElementValues::max_dofs> gather(const FunctionSpace& space, const CoefficientVector& u,
                                                          std::size_t t)
{
    std::array<double, ElementValues::max_dofs> out{};
    const auto dofs = space.cell_dofs(t);
    for (std::size_t k = 0; k < dofs.size(); ++k) out[k] = u[dofs[k]];
    return out;
}

/// Element residual (1 + alpha u^2) grad u . grad phi_i - f phi_i, generic in the scalar type.
template <typename S>
LocalArray<S> element_residual(const ElementValues& ev, const LocalArray<S>& u,
                               const std::array<double, ElementValues::n_qp>& f, double alpha)
{
    LocalArray<S> r{};
    for (auto& x : r) x = S(0.0);
    for (int q = 0; q < ElementValues::n_qp; ++q) {
        S uq(0.0), gx(0.0), gy(0.0);
        for (int k = 0; k < ev.n_dofs; ++k) {
            uq += u[k] * ev.phi[q][k];
            gx += u[k] * ev.grad[q][k][0];
            gy += u[k] * ev.grad[q][k][1];
        }
        const S coef = (1.0 + alpha * uq * uq) * ev.jxw[q];
        const S flux_x = coef * gx;
        const S flux_y = coef * gy;
        const double fq = f[q] * ev.jxw[q];
        for (int i = 0; i < ev.n_dofs; ++i)
            r[i] += flux_x * ev.grad[q][i][0] + flux_y * ev.grad[q][i][1] - fq * ev.phi[q][i];
    }
    return r;
}

inline std::array<double, ElementValues::n_qp> forcing_at_points(const ElementValues& ev,
                                                                 const ProblemDefinition& problem)
{
    std::array<double, ElementValues::n_qp> f{};
    for (int q = 0; q < ElementValues::n_qp; ++q) f[q] = problem.forcing(ev.points[q]);
    return f;
}

template <typename S>
S element_qoi(const ElementValues& ev, const LocalArray<S>& u, QoI qoi)
{
    S total(0.0);
    for (int q = 0; q < ElementValues::n_qp; ++q) {
        S uq(0.0), gx(0.0), gy(0.0);
        for (int k = 0; k < ev.n_dofs; ++k) {
            uq += u[k] * ev.phi[q][k];
            gx += u[k] * ev.grad[q][k][0];
            gy += u[k] * ev.grad[q][k][1];
        }
        total += qoi_integrand(qoi, uq, gx, gy) * ev.jxw[q];
    }
    return total;
}

inline bool element_in_qoi_support(const Mesh& mesh, std::size_t t, QoI qoi)
{
    return !qoi_on_subdomain(qoi) || mesh.region[t] == Region::Subdomain;
}

inline int count_singular_points(const ElementValues& ev, const LocalArray<double>& u)
{
    int n = 0;
    for (int q = 0; q < ElementValues::n_qp; ++q) {
        double gx = 0.0, gy = 0.0;
        for (int k = 0; k < ev.n_dofs; ++k) {
            gx += u[k] * ev.grad[q][k][0];
            gy += u[k] * ev.grad[q][k][1];
        }
        if (gx * gx + gy * gy < j4_regularization) ++n;
    }
    return n;
}

} // namespace detail

inline CoefficientVector assemble_residual(const FunctionSpace& space, const ProblemDefinition& problem,
                                           const CoefficientVector& u)
{
    CoefficientVector r = space.zeros();
    ElementValues ev;
    for (std::size_t t = 0; t < space.mesh().num_triangles(); ++t) {
        reinit(ev, space.mesh(), t, space.order());
        const auto local = detail::gather(space, u, t);
        const auto f = detail::forcing_at_points(ev, problem);
        const auto re = detail::element_residual<double>(ev, local, f, problem.alpha);
        const auto dofs = space.cell_dofs(t);
        for (int i = 0; i < ev.n_dofs; ++i) r[dofs[i]] += re[i];
    }
    space.constrain(r);
    return r;
}

/// Exact tangent of assemble_residual via element-level forward AD.
inline void assemble_jacobian(const FunctionSpace& space, const ProblemDefinition& problem,
                              const CoefficientVector& u, SparseMatrix& jac)
{
    using D = ad::Dual<ElementValues::max_dofs>;
    jac.set_zero();
    ElementValues ev;
    for (std::size_t t = 0; t < space.mesh().num_triangles(); ++t) {
        reinit(ev, space.mesh(), t, space.order());
        const auto local = detail::gather(space, u, t);
        const auto seeds = ad::lift_element_dofs<ElementValues::max_dofs>(local);
        const auto f = detail::forcing_at_points(ev, problem);
        const auto re = detail::element_residual<D>(ev, seeds, f, problem.alpha);
        const auto dofs = space.cell_dofs(t);
        for (int i = 0; i < ev.n_dofs; ++i)
            for (int j = 0; j < ev.n_dofs; ++j) jac.add(dofs[i], dofs[j], re[i].d[j]);
    }
    jac.eliminate(space);
}

inline SparseMatrix assemble_jacobian(const FunctionSpace& space, const ProblemDefinition& problem,
                                      const CoefficientVector& u)
{
    SparseMatrix jac(space);
    assemble_jacobian(space, problem, u, jac);
    return jac;
}

struct QoIEvaluation
{
    double value = 0.0;
    /// dJ/du with Dirichlet entries zeroed.
    CoefficientVector gradient;
    /// Quadrature points where |grad u|^2 fell below the J4 regularization floor.
    int singular_points = 0;
};

inline double qoi_value(const FunctionSpace& space, QoI qoi, const CoefficientVector& u)
{
    double total = 0.0;
    ElementValues ev;
    for (std::size_t t = 0; t < space.mesh().num_triangles(); ++t) {
        if (!detail::element_in_qoi_support(space.mesh(), t, qoi)) continue;
        reinit(ev, space.mesh(), t, space.order());
        total += detail::element_qoi<double>(ev, detail::gather(space, u, t), qoi);
    }
    return total;
}

inline QoIEvaluation assemble_qoi(const FunctionSpace& space, QoI qoi, const CoefficientVector& u)
{
    using D = ad::Dual<ElementValues::max_dofs>;
    QoIEvaluation out;
    out.gradient = space.zeros();
    ElementValues ev;
    for (std::size_t t = 0; t < space.mesh().num_triangles(); ++t) {
        if (!detail::element_in_qoi_support(space.mesh(), t, qoi)) continue;
        reinit(ev, space.mesh(), t, space.order());
        const auto local = detail::gather(space, u, t);
        const D j = detail::element_qoi<D>(ev, ad::lift_element_dofs<ElementValues::max_dofs>(local), qoi);
        out.value += j.value;
        const auto dofs = space.cell_dofs(t);
        for (int i = 0; i < ev.n_dofs; ++i) out.gradient[dofs[i]] += j.d[i];
        if (qoi == QoI::J4) out.singular_points += detail::count_singular_points(ev, local);
    }
    space.constrain(out.gradient);
    return out;
}

/// J(base + theta * direction) together with its first and second theta-derivatives.
/// The second derivative equals direction^T H direction for the QoI Hessian H.
inline ad::Taylor2 qoi_along_line(const FunctionSpace& space, QoI qoi, const CoefficientVector& base,
                                  const CoefficientVector& direction, double theta)
{
    ad::Taylor2 total;
    ElementValues ev;
    detail::LocalArray<ad::Taylor2> local{};
    for (std::size_t t = 0; t < space.mesh().num_triangles(); ++t) {
        if (!detail::element_in_qoi_support(space.mesh(), t, qoi)) continue;
        reinit(ev, space.mesh(), t, space.order());
        const auto dofs = space.cell_dofs(t);
        for (std::size_t k = 0; k < dofs.size(); ++k)
            local[k] = ad::line_seed(base[dofs[k]], direction[dofs[k]], theta);
        total += detail::element_qoi<ad::Taylor2>(ev, local, qoi);
    }
    if (!ad::isfinite(total)) throw std::domain_error("qoi_along_line: non-finite derivative (QoI singular point)");
    return total;
}

/// Partition-of-unity localized residual: for every mesh vertex i returns
/// L(w phi^i) - N(u; w phi^i), where phi^i is the P1 hat function of vertex i and
/// w the fine-space weight. The sum over all vertices equals -w . R(u).
inline std::vector<double> localized_residual(const FunctionSpace& space, const ProblemDefinition& problem,
                                              const CoefficientVector& u, const CoefficientVector& weight)
{
    const Mesh& mesh = space.mesh();
    std::vector<double> out(mesh.num_vertices(), 0.0);
    ElementValues ev;
    const auto& rule = triangle_rule_12();
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
        reinit(ev, mesh, t, space.order());
        const auto ul = detail::gather(space, u, t);
        const auto wl = detail::gather(space, weight, t);
        const auto f = detail::forcing_at_points(ev, problem);
        const auto& gl = ev.geometry.grad_lambda;
        for (int q = 0; q < ElementValues::n_qp; ++q) {
            double uq = 0.0, ux = 0.0, uy = 0.0, wq = 0.0, wx = 0.0, wy = 0.0;
            for (int k = 0; k < ev.n_dofs; ++k) {
                uq += ul[k] * ev.phi[q][k];
                ux += ul[k] * ev.grad[q][k][0];
                uy += ul[k] * ev.grad[q][k][1];
                wq += wl[k] * ev.phi[q][k];
                wx += wl[k] * ev.grad[q][k][0];
                wy += wl[k] * ev.grad[q][k][1];
            }
            const double coef = 1.0 + problem.alpha * uq * uq;
            for (int a = 0; a < 3; ++a) {
                const double hat = rule.points[q].bary[a];
                const double tx = hat * wx + wq * gl[a][0];
                const double ty = hat * wy + wq * gl[a][1];
                out[mesh.triangles[t][a]] += ev.jxw[q] * (f[q] * wq * hat - coef * (ux * tx + uy * ty));
            }
        }
    }
    return out;
}

/// Single-vertex form of localized_residual; only triangles touching the vertex contribute.
inline double weighted_variational_residual(const FunctionSpace& space, const ProblemDefinition& problem,
                                            const CoefficientVector& u, const CoefficientVector& weight,
                                            int vertex)
{
    const Mesh& mesh = space.mesh();
    if (vertex < 0 || static_cast<std::size_t>(vertex) >= mesh.num_vertices())
        throw SpaceError("weighted_variational_residual: vertex out of range");
    double total = 0.0;
    ElementValues ev;
    const auto& rule = triangle_rule_12();
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
        const auto& tri = mesh.triangles[t];
        int a = -1;
        for (int k = 0; k < 3; ++k)
            if (tri[k] == vertex) a = k;
        if (a < 0) continue;
        reinit(ev, mesh, t, space.order());
        const auto ul = detail::gather(space, u, t);
        const auto wl = detail::gather(space, weight, t);
        const auto f = detail::forcing_at_points(ev, problem);
        const auto& g = ev.geometry.grad_lambda[a];
        for (int q = 0; q < ElementValues::n_qp; ++q) {
            double uq = 0.0, ux = 0.0, uy = 0.0, wq = 0.0, wx = 0.0, wy = 0.0;
            for (int k = 0; k < ev.n_dofs; ++k) {
                uq += ul[k] * ev.phi[q][k];
                ux += ul[k] * ev.grad[q][k][0];
                uy += ul[k] * ev.grad[q][k][1];
                wq += wl[k] * ev.phi[q][k];
                wx += wl[k] * ev.grad[q][k][0];
                wy += wl[k] * ev.grad[q][k][1];
            }
            const double hat = rule.points[q].bary[a];
            const double coef = 1.0 + problem.alpha * uq * uq;
            total += ev.jxw[q] * (f[q] * wq * hat - coef * (ux * (hat * wx + wq * g[0]) + uy * (hat * wy + wq * g[1])));
        }
    }
    return total;
}

} // namespace goalest
