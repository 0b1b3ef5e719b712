#pragma once

#include <goalest/error.hpp>
#include <goalest/mesh.hpp>
#include <goalest/quadrature.hpp>

#include <Eigen/Core>

#include <array>
#include <map>
#include <memory>
#include <span>
#include <vector>

namespace goalest {

/// Nodal coefficients of a function in a FunctionSpace.
using CoefficientVector = Eigen::VectorXd;

using Vec2 = std::array<double, 2>;

/// Lagrange shape functions on the reference triangle in barycentric form.
/// Local P2 ordering: vertices 0,1,2 then edges (0,1), (1,2), (2,0).
namespace shape {

inline constexpr std::array<std::array<int, 2>, 3> local_edges{{{0, 1}, {1, 2}, {2, 0}}};

inline int local_count(int order) { return order == 1 ? 3 : 6; }

inline void values(int order, const std::array<double, 3>& l, std::span<double> phi)
{
    if (order == 1) {
        for (int i = 0; i < 3; ++i) phi[i] = l[i];
        return;
    }
    for (int i = 0; i < 3; ++i) phi[i] = l[i] * (2.0 * l[i] - 1.0);
    for (int e = 0; e < 3; ++e) phi[3 + e] = 4.0 * l[local_edges[e][0]] * l[local_edges[e][1]];
}

/// d phi_k / d lambda_j
inline void bary_gradients(int order, const std::array<double, 3>& l, std::span<std::array<double, 3>> dphi)
{
    for (auto& g : dphi) g = {0.0, 0.0, 0.0};
    if (order == 1) {
        for (int i = 0; i < 3; ++i) dphi[i][i] = 1.0;
        return;
    }
    for (int i = 0; i < 3; ++i) dphi[i][i] = 4.0 * l[i] - 1.0;
    for (int e = 0; e < 3; ++e) {
        const auto [a, b] = local_edges[e];
        dphi[3 + e][a] = 4.0 * l[b];
        dphi[3 + e][b] = 4.0 * l[a];
    }
}

} // namespace shape

/// Affine geometry of one triangle.
struct ElementGeometry
{
    double area = 0.0;
    std::array<Vec2, 3> grad_lambda{};
    std::array<Point, 3> corners{};

    [[nodiscard]] Point map(const std::array<double, 3>& l) const
    {
        return {l[0] * corners[0].x + l[1] * corners[1].x + l[2] * corners[2].x,
                l[0] * corners[0].y + l[1] * corners[1].y + l[2] * corners[2].y};
    }
};

inline ElementGeometry element_geometry(const Mesh& mesh, std::size_t t)
{
    ElementGeometry g;
    const auto& tri = mesh.triangles[t];
    for (int k = 0; k < 3; ++k) g.corners[k] = mesh.vertices[tri[k]];
    const auto& [p0, p1, p2] = g.corners;
    const double two_a = (p1.x - p0.x) * (p2.y - p0.y) - (p2.x - p0.x) * (p1.y - p0.y);
    g.area = 0.5 * two_a;
    g.grad_lambda[0] = {(p1.y - p2.y) / two_a, (p2.x - p1.x) / two_a};
    g.grad_lambda[1] = {(p2.y - p0.y) / two_a, (p0.x - p2.x) / two_a};
    g.grad_lambda[2] = {(p0.y - p1.y) / two_a, (p1.x - p0.x) / two_a};
    return g;
}

/// Shape values and physical gradients at every point of the 12-point rule
/// for one element.
struct ElementValues
{
    static constexpr int max_dofs = 6;
    static constexpr int n_qp = QuadratureRule::size;

    int n_dofs = 0;
    ElementGeometry geometry;
    std::array<double, n_qp> jxw{};
    std::array<Point, n_qp> points{};
    std::array<std::array<double, max_dofs>, n_qp> phi{};
    std::array<std::array<Vec2, max_dofs>, n_qp> grad{};
};

namespace detail {

struct ReferenceTable
{
    std::array<std::array<double, 6>, QuadratureRule::size> phi{};
    std::array<std::array<std::array<double, 3>, 6>, QuadratureRule::size> dphi{};
};

inline const ReferenceTable& reference_table(int order)
{
    static const auto build = [](int p) {
        ReferenceTable t;
        const auto& rule = triangle_rule_12();
        const int n = shape::local_count(p);
        for (int q = 0; q < QuadratureRule::size; ++q) {
            shape::values(p, rule.points[q].bary, std::span<double>(t.phi[q].data(), n));
            shape::bary_gradients(p, rule.points[q].bary, std::span<std::array<double, 3>>(t.dphi[q].data(), n));
        }
        return t;
    };
    static const ReferenceTable p1 = build(1);
    static const ReferenceTable p2 = build(2);
    return order == 1 ? p1 : p2;
}

} // namespace detail

inline void reinit(ElementValues& ev, const Mesh& mesh, std::size_t t, int order)
{
    const auto& rule = triangle_rule_12();
    const auto& ref = detail::reference_table(order);
    ev.n_dofs = shape::local_count(order);
    ev.geometry = element_geometry(mesh, t);
    const auto& gl = ev.geometry.grad_lambda;
    for (int q = 0; q < ElementValues::n_qp; ++q) {
        ev.jxw[q] = rule.points[q].weight * ev.geometry.area;
        ev.points[q] = ev.geometry.map(rule.points[q].bary);
        for (int k = 0; k < ev.n_dofs; ++k) {
            ev.phi[q][k] = ref.phi[q][k];
            const auto& d = ref.dphi[q][k];
            ev.grad[q][k] = {d[0] * gl[0][0] + d[1] * gl[1][0] + d[2] * gl[2][0],
                             d[0] * gl[0][1] + d[1] * gl[1][1] + d[2] * gl[2][1]};
        }
    }
}

/// Scalar continuous Lagrange space of order 1 or 2 on a triangle mesh with
/// homogeneous Dirichlet conditions on the whole boundary.
///
/// Dof numbering: vertices in mesh order, then (P2) edges in lexicographic
/// order of their sorted vertex pairs.
class FunctionSpace
{
public:
    FunctionSpace(std::shared_ptr<const Mesh> mesh, int order) : mesh_(std::move(mesh)), order_(order)
    {
        if (!mesh_) throw SpaceError("FunctionSpace: null mesh");
        if (order_ != 1 && order_ != 2) throw SpaceError("FunctionSpace: order must be 1 or 2");
        const auto& m = *mesh_;
        const int nv = static_cast<int>(m.num_vertices());
        const int per_cell = shape::local_count(order_);
        cell_dofs_.resize(m.num_triangles() * per_cell);

        std::map<EdgeKey, int> edge_index;
        if (order_ == 2) {
            for (const auto& tri : m.triangles)
                for (const auto& [a, b] : shape::local_edges) edge_index.emplace(edge_key(tri[a], tri[b]), 0);
            int next = nv;
            for (auto& [key, id] : edge_index) {
                id = next++;
                edges_.push_back(key);
            }
        }
        dof_count_ = static_cast<std::size_t>(nv) + edges_.size();

        for (std::size_t t = 0; t < m.num_triangles(); ++t) {
            const auto& tri = m.triangles[t];
            int* dofs = &cell_dofs_[t * per_cell];
            for (int k = 0; k < 3; ++k) dofs[k] = tri[k];
            if (order_ == 2)
                for (int e = 0; e < 3; ++e) {
                    const auto [a, b] = shape::local_edges[e];
                    dofs[3 + e] = edge_index.at(edge_key(tri[a], tri[b]));
                }
        }

        dirichlet_.assign(dof_count_, 0);
        for (const auto& be : m.boundary_edges) {
            dirichlet_[be.vertices.first] = 1;
            dirichlet_[be.vertices.second] = 1;
            if (order_ == 2) dirichlet_[edge_index.at(be.vertices)] = 1;
        }
    }

    [[nodiscard]] const Mesh& mesh() const { return *mesh_; }
    [[nodiscard]] const std::shared_ptr<const Mesh>& mesh_ptr() const { return mesh_; }
    [[nodiscard]] int order() const { return order_; }
    [[nodiscard]] std::size_t dof_count() const { return dof_count_; }
    [[nodiscard]] int dofs_per_cell() const { return shape::local_count(order_); }

    [[nodiscard]] std::span<const int> cell_dofs(std::size_t t) const
    {
        const auto n = static_cast<std::size_t>(dofs_per_cell());
        return {cell_dofs_.data() + t * n, n};
    }

    [[nodiscard]] bool is_dirichlet(std::size_t dof) const { return dirichlet_[dof] != 0; }
    [[nodiscard]] const std::vector<EdgeKey>& edges() const { return edges_; }

    [[nodiscard]] Point node(std::size_t dof) const
    {
        const auto nv = mesh_->num_vertices();
        if (dof < nv) return mesh_->vertices[dof];
        const auto& [a, b] = edges_[dof - nv];
        return midpoint(mesh_->vertices[a], mesh_->vertices[b]);
    }

    [[nodiscard]] CoefficientVector zeros() const { return CoefficientVector::Zero(static_cast<Eigen::Index>(dof_count_)); }

    /// Nodal interpolant of g; Dirichlet entries are forced to zero.
    template <typename F>
    [[nodiscard]] CoefficientVector interpolate(F&& g) const
    {
        CoefficientVector v = zeros();
        for (std::size_t i = 0; i < dof_count_; ++i)
            if (!is_dirichlet(i)) v[static_cast<Eigen::Index>(i)] = g(node(i));
        return v;
    }

    /// Zero the Dirichlet entries in place.
    void constrain(CoefficientVector& v) const
    {
        for (std::size_t i = 0; i < dof_count_; ++i)
            if (is_dirichlet(i)) v[static_cast<Eigen::Index>(i)] = 0.0;
    }

private:
    std::shared_ptr<const Mesh> mesh_;
    int order_;
    std::size_t dof_count_ = 0;
    std::vector<int> cell_dofs_;
    std::vector<EdgeKey> edges_;
    std::vector<char> dirichlet_;
};

struct PointValue
{
    double value = 0.0;
    Vec2 gradient{0.0, 0.0};
};

inline PointValue evaluate(const FunctionSpace& space, const CoefficientVector& coeffs, std::size_t triangle,
                           const std::array<double, 3>& bary)
{
    if (triangle >= space.mesh().num_triangles()) throw SpaceError("evaluate: triangle index out of range");
    if (static_cast<std::size_t>(coeffs.size()) != space.dof_count())
        throw SpaceError("evaluate: coefficient vector does not match space");
    const auto geo = element_geometry(space.mesh(), triangle);
    std::array<double, 6> phi{};
    std::array<std::array<double, 3>, 6> dphi{};
    const int n = space.dofs_per_cell();
    shape::values(space.order(), bary, std::span<double>(phi.data(), n));
    shape::bary_gradients(space.order(), bary, std::span<std::array<double, 3>>(dphi.data(), n));
    const auto dofs = space.cell_dofs(triangle);
    PointValue out;
    for (int k = 0; k < n; ++k) {
        const double c = coeffs[dofs[k]];
        out.value += c * phi[k];
        for (int j = 0; j < 3; ++j) {
            out.gradient[0] += c * dphi[k][j] * geo.grad_lambda[j][0];
            out.gradient[1] += c * dphi[k][j] * geo.grad_lambda[j][1];
        }
    }
    return out;
}

/// Interpolate a P1 function into the P2 space on the same mesh.
inline CoefficientVector prolong(const FunctionSpace& coarse, const CoefficientVector& v, const FunctionSpace& fine)
{
    if (coarse.order() != 1 || fine.order() != 2 || coarse.mesh_ptr() != fine.mesh_ptr())
        throw SpaceError("prolong: expects P1 -> P2 on one mesh");
    if (static_cast<std::size_t>(v.size()) != coarse.dof_count()) throw SpaceError("prolong: vector/space mismatch");
    const auto nv = static_cast<Eigen::Index>(coarse.dof_count());
    CoefficientVector out(static_cast<Eigen::Index>(fine.dof_count()));
    out.head(nv) = v;
    const auto& edges = fine.edges();
    for (std::size_t e = 0; e < edges.size(); ++e)
        out[nv + static_cast<Eigen::Index>(e)] = 0.5 * (v[edges[e].first] + v[edges[e].second]);
    return out;
}

/// Interpolate a P2 function at the P1 nodes (vertex values).
inline CoefficientVector restrict(const FunctionSpace& fine, const CoefficientVector& v, const FunctionSpace& coarse)
{
    if (coarse.order() != 1 || fine.order() != 2 || coarse.mesh_ptr() != fine.mesh_ptr())
        throw SpaceError("restrict: expects P2 -> P1 on one mesh");
    if (static_cast<std::size_t>(v.size()) != fine.dof_count()) throw SpaceError("restrict: vector/space mismatch");
    return v.head(static_cast<Eigen::Index>(coarse.dof_count()));
}

} // namespace goalest
