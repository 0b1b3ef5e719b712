#pragma once

#include <goalest/error.hpp>
#include <goalest/mesh.hpp>

#include <fstream>
#include <iomanip>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace goalest {

/// Named scalar field attached to a VTK export.
struct VtkField
{
    std::string name;
    std::vector<double> values;
};

/// Legacy ASCII UNSTRUCTURED_GRID with optional POINT_DATA (per vertex) and
/// CELL_DATA (per triangle). The subdomain flag is always written as a cell field.
inline void write_vtk(std::ostream& os, const Mesh& mesh, const std::vector<VtkField>& point_data = {},
                      const std::vector<VtkField>& cell_data = {})
{
    os << "# vtk DataFile Version 3.0\n"
       << "goalest mesh\n"
       << "ASCII\n"
       << "DATASET UNSTRUCTURED_GRID\n";
    os << std::setprecision(17);
    os << "POINTS " << mesh.num_vertices() << " double\n";
    for (const auto& p : mesh.vertices) os << p.x << ' ' << p.y << " 0\n";
    os << "CELLS " << mesh.num_triangles() << ' ' << 4 * mesh.num_triangles() << '\n';
    for (const auto& t : mesh.triangles) os << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
    os << "CELL_TYPES " << mesh.num_triangles() << '\n';
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t) os << "5\n";

    auto write_scalars = [&](const VtkField& f, std::size_t expected) {
        if (f.values.size() != expected) throw Error("write_vtk: field '" + f.name + "' has wrong length");
        os << "SCALARS " << f.name << " double 1\nLOOKUP_TABLE default\n";
        for (double v : f.values) os << v << '\n';
    };

    if (!point_data.empty()) {
        os << "POINT_DATA " << mesh.num_vertices() << '\n';
        for (const auto& f : point_data) write_scalars(f, mesh.num_vertices());
    }
    os << "CELL_DATA " << mesh.num_triangles() << '\n';
    os << "SCALARS subdomain int 1\nLOOKUP_TABLE default\n";
    for (auto r : mesh.region) os << (r == Region::Subdomain ? 1 : 0) << '\n';
    for (const auto& f : cell_data) write_scalars(f, mesh.num_triangles());
}

inline void write_vtk(const std::string& path, const Mesh& mesh, const std::vector<VtkField>& point_data = {},
                      const std::vector<VtkField>& cell_data = {})
{
    std::ofstream os(path);
    if (!os) throw Error("write_vtk: cannot open " + path);
    write_vtk(os, mesh, point_data, cell_data);
}

} // namespace goalest
