#pragma once

#include <array>

namespace goalest {

/// Barycentric quadrature point with weight normalized to the triangle measure.
struct QuadraturePoint
{
    std::array<double, 3> bary;
    double weight;
};

/// 12-point symmetric Gauss rule on triangles, exact for total degree 6.
/// Weights sum to one; multiply by |T| to integrate over a physical triangle.
struct QuadratureRule
{
    static constexpr int size = 12;
    std::array<QuadraturePoint, size> points;
};

inline const QuadratureRule& triangle_rule_12()
{
    static const QuadratureRule rule = [] {
        QuadratureRule r{};
        int n = 0;
        auto orbit3 = [&](double a, double w) {
            const double b = 0.5 * (1.0 - a);
            r.points[n++] = {{a, b, b}, w};
            r.points[n++] = {{b, a, b}, w};
            r.points[n++] = {{b, b, a}, w};
        };
        auto orbit6 = [&](double a, double b, double w) {
            const double c = 1.0 - a - b;
            r.points[n++] = {{a, b, c}, w};
            r.points[n++] = {{a, c, b}, w};
            r.points[n++] = {{b, a, c}, w};
            r.points[n++] = {{b, c, a}, w};
            r.points[n++] = {{c, a, b}, w};
            r.points[n++] = {{c, b, a}, w};
        };
        orbit3(0.501426509658179, 0.116786275726379366);
        orbit3(0.873821971016996, 0.050844906370206817);
        orbit6(0.053145049844817, 0.310352451033784, 0.082851075618373575);
        return r;
    }();
    return rule;
}

} // namespace goalest
