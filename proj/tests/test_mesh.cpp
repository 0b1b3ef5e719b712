#include "support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <set>
#include <sstream>

using namespace goalest;
using namespace goalest::testing;

namespace {

void expect_valid(const Mesh& mesh)
{
    EXPECT_TRUE(is_conforming(mesh));
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t) EXPECT_GT(mesh.signed_area(t), 0.0) << "triangle " << t;

    // interior edges are shared by two triangles, boundary edges by one
    std::set<EdgeKey> boundary;
    for (const auto& be : mesh.boundary_edges) boundary.insert(be.vertices);
    for (const auto& [edge, count] : edge_incidence(mesh)) {
        const bool on_gamma = boundary.contains(edge);
        EXPECT_EQ(count, on_gamma ? 1 : 2);
        const Point m = midpoint(mesh.vertices[edge.first], mesh.vertices[edge.second]);
        EXPECT_EQ(on_gamma, on_domain_boundary(m));
    }
}

// Region flags agree with the closed-form subdomain and no triangle straddles its boundary.
void expect_exact_regions(const Mesh& mesh)
{
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
        const auto& tri = mesh.triangles[t];
        const bool flagged = mesh.region[t] == Region::Subdomain;
        const Point c = mesh.centroid(t);
        EXPECT_EQ(flagged, in_subdomain_closure(c) && domain::in_subdomain(c)) << "triangle " << t;
        for (int k = 0; k < 3; ++k) {
            const Point m = midpoint(mesh.vertices[tri[k]], mesh.vertices[tri[(k + 1) % 3]]);
            const Point q{0.5 * (m.x + c.x), 0.5 * (m.y + c.y)};
            EXPECT_EQ(flagged, in_subdomain_closure(q)) << "triangle " << t;
        }
    }
}

std::set<std::array<std::pair<double, double>, 3>> triangle_set(const Mesh& mesh)
{
    std::set<std::array<std::pair<double, double>, 3>> out;
    for (const auto& tri : mesh.triangles) {
        std::array<std::pair<double, double>, 3> key;
        for (int k = 0; k < 3; ++k) key[k] = {mesh.vertices[tri[k]].x, mesh.vertices[tri[k]].y};
        std::sort(key.begin(), key.end());
        out.insert(key);
    }
    return out;
}

} // namespace

TEST(InitialMesh, Has192Triangles)
{
    const Mesh mesh = generate_initial_mesh();
    EXPECT_EQ(mesh.num_triangles(), 192u);
    EXPECT_EQ(mesh.region.size(), 192u);
}

TEST(InitialMesh, AreasOfDomainAndSubdomain)
{
    const Mesh mesh = generate_initial_mesh();
    EXPECT_NEAR(mesh.total_area(), 3.0, 1e-12);
    EXPECT_NEAR(mesh.subdomain_area(), 0.75, 1e-12);
}

TEST(InitialMesh, ConformingAndCounterclockwise)
{
    const Mesh mesh = generate_initial_mesh();
    expect_valid(mesh);
    expect_exact_regions(mesh);
}

TEST(InitialMesh, VerticesOnQuarterGrid)
{
    const Mesh mesh = generate_initial_mesh();
    for (const auto& p : mesh.vertices) {
        EXPECT_NEAR(p.x * 8.0, std::round(p.x * 8.0), 1e-12);
        EXPECT_NEAR(p.y * 8.0, std::round(p.y * 8.0), 1e-12);
        EXPECT_TRUE(domain::in_domain_closure(p));
    }
    // every corner of the subdomain is a mesh vertex
    for (const Point corner : {Point{0, -1}, Point{1, -1}, Point{1, 0}, Point{0.5, 0}, Point{0.5, -0.5}, Point{0, -0.5}}) {
        const bool found = std::any_of(mesh.vertices.begin(), mesh.vertices.end(),
                                       [&](const Point& p) { return distance(p, corner) < 1e-14; });
        EXPECT_TRUE(found) << corner.x << "," << corner.y;
    }
}

TEST(UniformRefine, CountsFollowTheSequence)
{
    Mesh mesh = generate_initial_mesh();
    const std::array<std::size_t, 3> expected{768, 3072, 12288};
    for (std::size_t expected_count : expected) {
        mesh = uniform_refine(mesh);
        EXPECT_EQ(mesh.num_triangles(), expected_count);
    }
}

TEST(UniformRefine, PreservesAreasRegionsAndConformity)
{
    const Mesh m0 = generate_initial_mesh();
    const Mesh m1 = uniform_refine(m0);
    const Mesh m2 = uniform_refine(m1);
    for (const Mesh* m : {&m1, &m2}) {
        EXPECT_NEAR(m->total_area(), m0.total_area(), 1e-12);
        EXPECT_NEAR(m->subdomain_area(), 0.75, 1e-12);
        expect_valid(*m);
        expect_exact_regions(*m);
    }
}

TEST(UniformRefine, ChildrenHaveHalfTheSize)
{
    const Mesh m0 = generate_initial_mesh();
    const Mesh m1 = uniform_refine(m0);
    double max0 = 0.0, max1 = 0.0;
    for (std::size_t t = 0; t < m0.num_triangles(); ++t) max0 = std::max(max0, m0.element_size(t));
    for (std::size_t t = 0; t < m1.num_triangles(); ++t) max1 = std::max(max1, m1.element_size(t));
    EXPECT_NEAR(max1, 0.5 * max0, 1e-14);
}

TEST(Adapt, CurrentSizesLeaveMeshUnchanged)
{
    const Mesh mesh = generate_initial_mesh();
    SizeField size;
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t) size.target.push_back(mesh.element_size(t));
    const Mesh out = adapt(mesh, size);
    EXPECT_EQ(out.num_triangles(), mesh.num_triangles());
    EXPECT_EQ(out.num_vertices(), mesh.num_vertices());
    EXPECT_EQ(triangle_set(out), triangle_set(mesh));
}

TEST(Adapt, HalfSizesRefineEveryElement)
{
    const Mesh mesh = generate_initial_mesh();
    SizeField size;
    double max_target = 0.0;
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
        size.target.push_back(0.5 * mesh.element_size(t));
        max_target = std::max(max_target, size.target.back());
    }
    const Mesh out = adapt(mesh, size);
    EXPECT_GE(out.num_triangles(), 2 * mesh.num_triangles());
    // no original triangle survives and every new element meets the requested size
    const auto before = triangle_set(mesh);
    for (const auto& key : triangle_set(out)) EXPECT_FALSE(before.contains(key));
    for (std::size_t t = 0; t < out.num_triangles(); ++t) EXPECT_LE(out.element_size(t), max_target * (1 + 1e-12));
    expect_valid(out);
    expect_exact_regions(out);
    EXPECT_NEAR(out.total_area(), 3.0, 1e-12);
}

TEST(Adapt, SingleVertexIndicatorStaysLocal)
{
    const Mesh mesh = generate_initial_mesh();
    // interior grid corner shared by four cells
    int v = -1;
    for (std::size_t i = 0; i < mesh.num_vertices(); ++i)
        if (distance(mesh.vertices[i], Point{-0.75, -0.75}) < 1e-14) v = static_cast<int>(i);
    ASSERT_GE(v, 0);

    std::vector<double> indicator(mesh.num_triangles(), 0.0);
    std::set<int> ring;
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
        const auto& tri = mesh.triangles[t];
        if (std::find(tri.begin(), tri.end(), v) == tri.end()) continue;
        indicator[t] = 1.0;
        ring.insert(tri.begin(), tri.end());
    }
    std::vector<std::size_t> two_ring;
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
        const auto& tri = mesh.triangles[t];
        if (std::any_of(tri.begin(), tri.end(), [&](int a) { return ring.contains(a); })) two_ring.push_back(t);
    }

    const auto field = compute_size_field(mesh, indicator, 2.0 * static_cast<double>(mesh.num_triangles()));
    const Mesh out = adapt(mesh, field.size);
    expect_valid(out);

    const auto before = triangle_set(mesh);
    std::size_t created = 0, local = 0;
    for (std::size_t t = 0; t < out.num_triangles(); ++t) {
        std::array<std::pair<double, double>, 3> key;
        for (int k = 0; k < 3; ++k) key[k] = {out.vertices[out.triangles[t][k]].x, out.vertices[out.triangles[t][k]].y};
        std::sort(key.begin(), key.end());
        if (before.contains(key)) continue;
        ++created;
        const Point c = out.centroid(t);
        if (std::any_of(two_ring.begin(), two_ring.end(), [&](std::size_t s) { return point_in_triangle(mesh, s, c); }))
            ++local;
    }
    ASSERT_GT(created, 0u);
    EXPECT_GE(static_cast<double>(local), 0.8 * static_cast<double>(created));
}

TEST(Adapt, RepeatedAdaptationKeepsInvariants)
{
    Mesh mesh = generate_initial_mesh();
    for (int cycle = 0; cycle < 3; ++cycle) {
        SizeField size;
        for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
            const Point c = mesh.centroid(t);
            const double ratio = std::hypot(c.x - 0.5, c.y + 0.5) < 0.3 ? 0.5 : 2.0;
            size.target.push_back(ratio * mesh.element_size(t));
        }
        mesh = adapt(mesh, size);
        expect_valid(mesh);
        expect_exact_regions(mesh);
        EXPECT_NEAR(mesh.total_area(), 3.0, 1e-12);
        EXPECT_NEAR(mesh.subdomain_area(), 0.75, 1e-12);
    }
}

TEST(Adapt, RejectsWrongSizeFieldLength)
{
    const Mesh mesh = generate_initial_mesh();
    EXPECT_THROW((void)adapt(mesh, SizeField{{1.0, 2.0}}), MeshError);
}

TEST(Vtk, WritesPointsCellsAndFields)
{
    const Mesh mesh = generate_initial_mesh();
    std::ostringstream os;
    write_vtk(os, mesh, {{"u", std::vector<double>(mesh.num_vertices(), 1.0)}},
              {{"eta", std::vector<double>(mesh.num_triangles(), 2.0)}});
    const std::string s = os.str();
    EXPECT_NE(s.find("DATASET UNSTRUCTURED_GRID"), std::string::npos);
    EXPECT_NE(s.find("POINTS " + std::to_string(mesh.num_vertices())), std::string::npos);
    EXPECT_NE(s.find("CELLS 192 768"), std::string::npos);
    EXPECT_NE(s.find("SCALARS u double"), std::string::npos);
    EXPECT_NE(s.find("SCALARS eta double"), std::string::npos);
    EXPECT_NE(s.find("SCALARS subdomain int"), std::string::npos);
    EXPECT_THROW(write_vtk(os, mesh, {{"bad", {1.0}}}), Error);
}
