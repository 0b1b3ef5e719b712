#pragma once

#include <goalest/error.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <utility>
#include <vector>

namespace goalest {

struct Point
{
    double x = 0.0;
    double y = 0.0;
};

inline Point midpoint(const Point& a, const Point& b) { return {0.5 * (a.x + b.x), 0.5 * (a.y + b.y)}; }
inline double distance(const Point& a, const Point& b) { return std::hypot(a.x - b.x, a.y - b.y); }

enum class Region : std::uint8_t { Outside, Subdomain };
enum class BoundaryTag : std::uint8_t { Dirichlet };

using Triangle = std::array<int, 3>;
using EdgeKey = std::pair<int, int>;

inline EdgeKey edge_key(int a, int b) { return a < b ? EdgeKey{a, b} : EdgeKey{b, a}; }

struct BoundaryEdge
{
    EdgeKey vertices;
    BoundaryTag tag = BoundaryTag::Dirichlet;
};

/// Conforming triangulation of the square-with-hole domain.
///
/// Triangles are counterclockwise. The edge (t[0], t[1]) of every triangle is its
/// refinement edge and t[2] is its newest vertex; all refinement routines keep
/// that labeling so that bisection closure stays local.
struct Mesh
{
    std::vector<Point> vertices;
    std::vector<Triangle> triangles;
    std::vector<BoundaryEdge> boundary_edges;
    std::vector<Region> region;

    [[nodiscard]] std::size_t num_vertices() const { return vertices.size(); }
    [[nodiscard]] std::size_t num_triangles() const { return triangles.size(); }

    [[nodiscard]] double signed_area(std::size_t t) const
    {
        const auto& [a, b, c] = triangles[t];
        const Point& p = vertices[a];
        const Point& q = vertices[b];
        const Point& r = vertices[c];
        return 0.5 * ((q.x - p.x) * (r.y - p.y) - (r.x - p.x) * (q.y - p.y));
    }

    /// Characteristic element size: the longest edge.
    [[nodiscard]] double element_size(std::size_t t) const
    {
        const auto& tri = triangles[t];
        double h = 0.0;
        for (int k = 0; k < 3; ++k)
            h = std::max(h, distance(vertices[tri[k]], vertices[tri[(k + 1) % 3]]));
        return h;
    }

    [[nodiscard]] Point centroid(std::size_t t) const
    {
        const auto& [a, b, c] = triangles[t];
        return {(vertices[a].x + vertices[b].x + vertices[c].x) / 3.0,
                (vertices[a].y + vertices[b].y + vertices[c].y) / 3.0};
    }

    [[nodiscard]] double total_area() const
    {
        double s = 0.0;
        for (std::size_t t = 0; t < triangles.size(); ++t) s += signed_area(t);
        return s;
    }

    [[nodiscard]] double subdomain_area() const
    {
        double s = 0.0;
        for (std::size_t t = 0; t < triangles.size(); ++t)
            if (region[t] == Region::Subdomain) s += signed_area(t);
        return s;
    }
};

namespace domain {

// Omega = (-1,1)^2 \ [-1/2,1/2]^2
inline bool in_domain_closure(const Point& p, double tol = 1e-12)
{
    const bool in_box = std::abs(p.x) <= 1.0 + tol && std::abs(p.y) <= 1.0 + tol;
    const bool in_hole = std::abs(p.x) < 0.5 - tol && std::abs(p.y) < 0.5 - tol;
    return in_box && !in_hole;
}

inline bool on_boundary(const Point& p, double tol = 1e-12)
{
    if (!in_domain_closure(p, tol)) return false;
    const bool outer = std::abs(std::abs(p.x) - 1.0) <= tol || std::abs(std::abs(p.y) - 1.0) <= tol;
    const bool hole = (std::abs(std::abs(p.x) - 0.5) <= tol && std::abs(p.y) <= 0.5 + tol) ||
                      (std::abs(std::abs(p.y) - 0.5) <= tol && std::abs(p.x) <= 0.5 + tol);
    return outer || hole;
}

// Omega_s = (0,1)x(-1,0) \ [0,1/2]x[-1/2,0], tested on an interior point such as a centroid.
inline bool in_subdomain(const Point& p)
{
    const bool in_quadrant = p.x > 0.0 && p.x < 1.0 && p.y > -1.0 && p.y < 0.0;
    const bool in_notch = p.x <= 0.5 && p.y >= -0.5;
    return in_quadrant && !in_notch;
}

} // namespace domain

namespace detail {

/// Rotate a CCW triangle so that its longest edge becomes (t[0], t[1]).
inline Triangle longest_edge_first(const Mesh& mesh, Triangle t)
{
    int best = 0;
    double best_len = -1.0;
    for (int k = 0; k < 3; ++k) {
        const double len = distance(mesh.vertices[t[k]], mesh.vertices[t[(k + 1) % 3]]);
        if (len > best_len * (1.0 + 1e-12)) {
            best_len = len;
            best = k;
        }
    }
    return {t[best], t[(best + 1) % 3], t[(best + 2) % 3]};
}

class MidpointCache
{
public:
    explicit MidpointCache(Mesh& mesh) : mesh_(mesh) {}

    int operator()(int a, int b)
    {
        const auto key = edge_key(a, b);
        if (auto it = cache_.find(key); it != cache_.end()) return it->second;
        const int id = static_cast<int>(mesh_.vertices.size());
        mesh_.vertices.push_back(midpoint(mesh_.vertices[a], mesh_.vertices[b]));
        cache_.emplace(key, id);
        return id;
    }

    [[nodiscard]] const std::map<EdgeKey, int>& entries() const { return cache_; }

private:
    Mesh& mesh_;
    std::map<EdgeKey, int> cache_;
};

inline std::vector<BoundaryEdge> split_boundary(const std::vector<BoundaryEdge>& edges,
                                                const std::map<EdgeKey, int>& midpoints)
{
    std::vector<BoundaryEdge> out;
    out.reserve(edges.size() * 2);
    for (const auto& e : edges) {
        if (auto it = midpoints.find(e.vertices); it != midpoints.end()) {
            out.push_back({edge_key(e.vertices.first, it->second), e.tag});
            out.push_back({edge_key(it->second, e.vertices.second), e.tag});
        } else {
            out.push_back(e);
        }
    }
    return out;
}

} // namespace detail

/// Structured criss-cross mesh: 0.25 x 0.25 cells over the domain, each cell cut
/// into four triangles by its diagonals. 48 cells, 192 triangles.
inline Mesh generate_initial_mesh()
{
    constexpr int n = 8;
    constexpr double h = 2.0 / n;
    Mesh mesh;

    auto cell_in_hole = [](int i, int j) { return i >= 2 && i < 6 && j >= 2 && j < 6; };
    auto node_in_hole = [](int i, int j) { return i > 2 && i < 6 && j > 2 && j < 6; };

    std::vector<int> grid((n + 1) * (n + 1), -1);
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i) {
            if (node_in_hole(i, j)) continue;
            grid[j * (n + 1) + i] = static_cast<int>(mesh.vertices.size());
            mesh.vertices.push_back({-1.0 + i * h, -1.0 + j * h});
        }
    auto node = [&](int i, int j) { return grid[j * (n + 1) + i]; };

    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            if (cell_in_hole(i, j)) continue;
            const int center = static_cast<int>(mesh.vertices.size());
            mesh.vertices.push_back({-1.0 + (i + 0.5) * h, -1.0 + (j + 0.5) * h});
            const std::array<int, 4> corners{node(i, j), node(i + 1, j), node(i + 1, j + 1), node(i, j + 1)};
            const Region region = domain::in_subdomain(mesh.vertices[center]) ? Region::Subdomain : Region::Outside;
            for (int k = 0; k < 4; ++k) {
                // cell side is the refinement edge, the center is the newest vertex
                mesh.triangles.push_back({corners[k], corners[(k + 1) % 4], center});
                mesh.region.push_back(region);
            }
        }

    for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i) {
            if (i < n && node(i, j) >= 0 && node(i + 1, j) >= 0) {
                const int a = node(i, j), b = node(i + 1, j);
                if (domain::on_boundary(midpoint(mesh.vertices[a], mesh.vertices[b])))
                    mesh.boundary_edges.push_back({edge_key(a, b)});
            }
            if (j < n && node(i, j) >= 0 && node(i, j + 1) >= 0) {
                const int a = node(i, j), b = node(i, j + 1);
                if (domain::on_boundary(midpoint(mesh.vertices[a], mesh.vertices[b])))
                    mesh.boundary_edges.push_back({edge_key(a, b)});
            }
        }
    return mesh;
}

/// Red refinement: every triangle split into four via its edge midpoints.
inline Mesh uniform_refine(const Mesh& mesh)
{
    Mesh out;
    out.vertices = mesh.vertices;
    out.triangles.reserve(mesh.triangles.size() * 4);
    out.region.reserve(mesh.triangles.size() * 4);
    detail::MidpointCache mid(out);

    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto [a, b, c] = mesh.triangles[t];
        const int ab = mid(a, b), bc = mid(b, c), ca = mid(c, a);
        for (const Triangle child : {Triangle{a, ab, ca}, Triangle{ab, b, bc}, Triangle{ca, bc, c}, Triangle{ab, bc, ca}}) {
            out.triangles.push_back(detail::longest_edge_first(out, child));
            out.region.push_back(mesh.region[t]);
        }
    }
    out.boundary_edges = detail::split_boundary(mesh.boundary_edges, mid.entries());
    return out;
}

/// Per-element target sizes (longest-edge lengths).
struct SizeField
{
    std::vector<double> target;
};

/// Refine-only adaptation by newest-vertex bisection with conformity closure.
/// Elements are bisected until their size is at most their (inherited) target.
inline Mesh adapt(const Mesh& mesh, const SizeField& size)
{
    if (size.target.size() != mesh.triangles.size())
        throw MeshError("adapt: size field length does not match element count");
    for (double s : size.target)
        if (!(s > 0.0)) throw MeshError("adapt: size field must be positive");

    Mesh cur = mesh;
    std::vector<double> target = size.target;
    constexpr double slack = 1.0 + 1e-10;

    for (int pass = 0; pass < 64; ++pass) {
        std::map<EdgeKey, int> split;
        for (std::size_t t = 0; t < cur.triangles.size(); ++t)
            if (cur.element_size(t) > target[t] * slack)
                split.emplace(edge_key(cur.triangles[t][0], cur.triangles[t][1]), -1);
        if (split.empty()) return cur;

        // closure: any triangle with a split edge must also split its refinement edge
        for (bool changed = true; changed;) {
            changed = false;
            for (const auto& tri : cur.triangles) {
                const auto ref = edge_key(tri[0], tri[1]);
                if (split.count(ref)) continue;
                if (split.count(edge_key(tri[1], tri[2])) || split.count(edge_key(tri[2], tri[0]))) {
                    split.emplace(ref, -1);
                    changed = true;
                }
            }
        }

        for (auto& [key, id] : split) {
            id = static_cast<int>(cur.vertices.size());
            cur.vertices.push_back(midpoint(cur.vertices[key.first], cur.vertices[key.second]));
        }

        Mesh next;
        next.vertices = cur.vertices;
        std::vector<double> next_target;
        auto emit = [&](auto&& self, const Triangle& tri, Region r, double tgt) -> void {
            auto it = split.find(edge_key(tri[0], tri[1]));
            if (it == split.end()) {
                next.triangles.push_back(tri);
                next.region.push_back(r);
                next_target.push_back(tgt);
                return;
            }
            const int m = it->second;
            self(self, Triangle{tri[2], tri[0], m}, r, tgt);
            self(self, Triangle{tri[1], tri[2], m}, r, tgt);
        };
        for (std::size_t t = 0; t < cur.triangles.size(); ++t) emit(emit, cur.triangles[t], cur.region[t], target[t]);

        next.boundary_edges = detail::split_boundary(cur.boundary_edges, split);
        cur = std::move(next);
        target = std::move(next_target);
    }
    throw MeshError("adapt: bisection did not reach the requested sizes");
}

/// Edge -> incident triangle count; used for conformity checks.
inline std::map<EdgeKey, int> edge_incidence(const Mesh& mesh)
{
    std::map<EdgeKey, int> count;
    for (const auto& tri : mesh.triangles)
        for (int k = 0; k < 3; ++k) ++count[edge_key(tri[k], tri[(k + 1) % 3])];
    return count;
}

/// True when every interior edge has two incident triangles and every boundary
/// edge has one, with no hanging vertices.
inline bool is_conforming(const Mesh& mesh)
{
    const auto incidence = edge_incidence(mesh);
    std::map<EdgeKey, bool> boundary;
    for (const auto& e : mesh.boundary_edges) boundary[e.vertices] = true;
    for (const auto& [key, n] : incidence) {
        const bool is_boundary = boundary.count(key) > 0;
        if (is_boundary && n != 1) return false;
        if (!is_boundary && n != 2) return false;
    }
    return std::all_of(boundary.begin(), boundary.end(), [&](const auto& kv) { return incidence.count(kv.first) > 0; });
}

} // namespace goalest
