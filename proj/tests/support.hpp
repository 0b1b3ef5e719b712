#pragma once

#include <goalest/goalest.hpp>

#include <cmath>
#include <memory>
#include <random>

namespace goalest::testing {

inline std::shared_ptr<const Mesh> mesh_ptr(int refinements = 0)
{
    Mesh m = generate_initial_mesh();
    for (int i = 0; i < refinements; ++i) m = uniform_refine(m);
    return std::make_shared<const Mesh>(std::move(m));
}

/// Uniform random coefficients in [lo, hi] with Dirichlet entries zeroed.
inline CoefficientVector random_vector(const FunctionSpace& space, unsigned seed, double lo = -1.0, double hi = 1.0)
{
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> dist(lo, hi);
    CoefficientVector v = space.zeros();
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = dist(rng);
    space.constrain(v);
    return v;
}

inline double relative_error(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

inline double relative_error(const CoefficientVector& a, const CoefficientVector& b)
{
    return (a - b).norm() / std::max(b.norm(), 1e-300);
}

/// Closed form of the closure of the subdomain (0,1)x(-1,0) minus [0,1/2]x[-1/2,0].
inline bool in_subdomain_closure(const Point& p, double tol = 1e-12)
{
    const bool in_box = p.x >= -tol && p.x <= 1.0 + tol && p.y >= -1.0 - tol && p.y <= tol;
    const bool in_hole = p.x > tol && p.x < 0.5 - tol && p.y > -0.5 + tol && p.y < -tol;
    return in_box && !in_hole;
}

/// Point lies on the outer square or on the hole boundary.
inline bool on_domain_boundary(const Point& p, double tol = 1e-12)
{
    const double ax = std::abs(p.x), ay = std::abs(p.y);
    const bool outer = std::abs(ax - 1.0) <= tol || std::abs(ay - 1.0) <= tol;
    const bool hole = (std::abs(ax - 0.5) <= tol && ay <= 0.5 + tol) || (std::abs(ay - 0.5) <= tol && ax <= 0.5 + tol);
    return outer || hole;
}

inline bool point_in_triangle(const Mesh& mesh, std::size_t t, const Point& p, double tol = 1e-12)
{
    const auto& [a, b, c] = mesh.triangles[t];
    const Point& pa = mesh.vertices[a];
    const Point& pb = mesh.vertices[b];
    const Point& pc = mesh.vertices[c];
    auto cross = [](const Point& o, const Point& u, const Point& v) {
        return (u.x - o.x) * (v.y - o.y) - (u.y - o.y) * (v.x - o.x);
    };
    const double area = cross(pa, pb, pc);
    return cross(pa, pb, p) >= -tol * area && cross(pb, pc, p) >= -tol * area && cross(pc, pa, p) >= -tol * area;
}

} // namespace goalest::testing
