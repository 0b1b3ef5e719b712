#pragma once

#include <goalest/assembly.hpp>
#include <goalest/estimator.hpp>
#include <goalest/mesh.hpp>
#include <goalest/space.hpp>

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <vector>

namespace goalest {

/// Vertex contributions (signed) and element indicators (non-negative).
struct IndicatorField
{
    std::vector<double> vertex;
    std::vector<double> element;

    [[nodiscard]] double vertex_sum() const { return std::accumulate(vertex.begin(), vertex.end(), 0.0); }
};

/// Element indicator: the vertex field interpolated to the centroid, in absolute value.
inline std::vector<double> element_indicators(const Mesh& mesh, const std::vector<double>& vertex)
{
    std::vector<double> out(mesh.num_triangles());
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
        const auto& [a, b, c] = mesh.triangles[t];
        out[t] = std::abs((vertex[a] + vertex[b] + vertex[c]) / 3.0);
    }
    return out;
}

/// Partition-of-unity localization of -(z - z_H) . R^h(u^H_h) onto mesh vertices.
inline IndicatorField localize(const FunctionSpace& coarse, const FunctionSpace& fine,
                               const ProblemDefinition& problem, const CoefficientVector& u_coarse_fine,
                               const CoefficientVector& z)
{
    const CoefficientVector z_H = prolong(coarse, restrict(fine, z, coarse), fine);
    IndicatorField out;
    out.vertex = localized_residual(fine, problem, u_coarse_fine, z - z_H);
    out.element = element_indicators(fine.mesh(), out.vertex);
    return out;
}

struct SizeFieldResult
{
    SizeField size;
    /// target / current size, after clamping
    std::vector<double> ratio;
};

/// Equidistributing size field for a target element count, clamped to [1/2, 2]
/// times the current size. p is the coarse-space order, d the dimension.
inline SizeFieldResult compute_size_field(const Mesh& mesh, const std::vector<double>& element_indicator,
                                          double target_elements, int p = 1, int d = 2)
{
    if (element_indicator.size() != mesh.num_triangles())
        throw Error("compute_size_field: indicator length does not match element count");
    if (!(target_elements >= 1.0)) throw Error("compute_size_field: target element count must be >= 1");
    const double q = 2.0 * d / (2.0 * p + d);
    const double r = -2.0 / (2.0 * p + d);

    double sum = 0.0;
    for (double eta : element_indicator) sum += std::pow(eta, q);
    const double scale = std::pow(sum / target_elements, 1.0 / d);

    SizeFieldResult out;
    out.size.target.resize(mesh.num_triangles());
    out.ratio.resize(mesh.num_triangles());
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
        const double eta = element_indicator[t];
        double ratio = eta > 0.0 ? scale * std::pow(eta, r) : 2.0;
        ratio = std::clamp(ratio, 0.5, 2.0);
        out.ratio[t] = ratio;
        out.size.target[t] = ratio * mesh.element_size(t);
    }
    return out;
}

enum class EstimatorChoice { Eta1, Eta2 };

struct AdaptiveCycleResult
{
    std::shared_ptr<const Mesh> mesh;
    EstimationResult estimate;
    IndicatorField indicators;
    SizeFieldResult size_field;
};

/// One solve -> estimate -> localize -> adapt cycle. The eta1 drive localizes z^h,
/// the eta2 drive localizes z**; the target count is target_factor * n_el.
inline AdaptiveCycleResult adaptive_cycle(const std::shared_ptr<const Mesh>& mesh, const ProblemDefinition& problem,
                                          QoI qoi, EstimatorChoice drive, double target_factor = 2.0,
                                          const PassOptions& options = {})
{
    const FunctionSpace coarse(mesh, 1);
    const FunctionSpace fine(mesh, 2);
    PassOptions opts = options;
    if (drive == EstimatorChoice::Eta2) opts.with_eta2 = true;

    AdaptiveCycleResult out;
    out.estimate = run_estimation_pass(coarse, fine, problem, qoi, opts);
    const auto& weight = drive == EstimatorChoice::Eta1 ? out.estimate.fields.z_h : out.estimate.fields.z_star_star;
    out.indicators = localize(coarse, fine, problem, out.estimate.fields.u_coarse_fine, weight);
    out.size_field = compute_size_field(*mesh, out.indicators.element,
                                        target_factor * static_cast<double>(mesh->num_triangles()));
    out.mesh = std::make_shared<const Mesh>(adapt(*mesh, out.size_field.size));
    return out;
}

} // namespace goalest
