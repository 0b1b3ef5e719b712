#pragma once

#include <goalest/error.hpp>
#include <goalest/mesh.hpp>
#include <goalest/space.hpp>

#include <array>
#include <cctype>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>

namespace goalest {

/// Quantities of interest. J1 integrates over the whole domain, J2-J4 over the subdomain.
enum class QoI { J1, J2, J3, J4 };

inline constexpr std::array<QoI, 4> all_qois{QoI::J1, QoI::J2, QoI::J3, QoI::J4};

inline int qoi_index(QoI q) { return static_cast<int>(q); }

inline std::string_view to_string(QoI q)
{
    constexpr std::array<std::string_view, 4> names{"j1", "j2", "j3", "j4"};
    return names[qoi_index(q)];
}

/// Accepts "j3" or "J3".
inline QoI parse_qoi(std::string_view s)
{
    std::string lower(s);
    for (auto& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    for (QoI q : all_qois)
        if (lower == to_string(q)) return q;
    throw Error("unknown QoI '" + std::string(s) + "'");
}

inline bool qoi_on_subdomain(QoI q) { return q != QoI::J1; }

/// Regularization of the gradient-magnitude QoI: sqrt(|grad u|^2 + eps^2).
inline constexpr double j4_regularization = 1e-12;

/// Integrand of each QoI in terms of u and its gradient, generic over the
/// scalar type so one definition serves values, gradients and line derivatives.
template <typename S>
S qoi_integrand(QoI q, const S& u, const S& ux, const S& uy)
{
    using std::sqrt;
    switch (q) {
    case QoI::J1: return u;
    case QoI::J2: return u * u * u;
    case QoI::J3: return ux * ux + uy * uy;
    case QoI::J4: return sqrt(ux * ux + uy * uy + j4_regularization * j4_regularization);
    }
    return S(0.0);
}

struct ExactSolution
{
    std::function<double(const Point&)> value;
    std::function<Vec2(const Point&)> gradient;
};

/// -div((1 + alpha u^2) grad u) = f in the domain, u = 0 on the boundary.
struct ProblemDefinition
{
    std::string name;
    double alpha = 0.0;
    std::function<double(const Point&)> forcing;
    std::optional<ExactSolution> exact;
    /// Exact (manufactured) or reference (singular) values of J1..J4.
    std::array<double, 4> qoi_values{};
    bool qoi_values_exact = false;

    [[nodiscard]] double qoi_value(QoI q) const { return qoi_values[qoi_index(q)]; }
};

namespace manufactured {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

inline double u(const Point& p)
{
    return std::sin(two_pi * p.x) * std::sin(two_pi * p.y) * std::exp(2.5 * (p.x + p.y));
}

inline Vec2 grad_u(const Point& p)
{
    const double sx = std::sin(two_pi * p.x), cx = std::cos(two_pi * p.x);
    const double sy = std::sin(two_pi * p.y), cy = std::cos(two_pi * p.y);
    const double e = std::exp(2.5 * (p.x + p.y));
    return {(two_pi * cx * sy + 2.5 * sx * sy) * e, (two_pi * sx * cy + 2.5 * sx * sy) * e};
}

inline double laplacian_u(const Point& p)
{
    const double sx = std::sin(two_pi * p.x), cx = std::cos(two_pi * p.x);
    const double sy = std::sin(two_pi * p.y), cy = std::cos(two_pi * p.y);
    const double e = std::exp(2.5 * (p.x + p.y));
    const double k = 6.25 - two_pi * two_pi;
    return e * (2.0 * k * sx * sy + 5.0 * two_pi * (cx * sy + sx * cy));
}

inline double forcing(const Point& p, double alpha)
{
    const double v = u(p);
    const auto g = grad_u(p);
    return -(1.0 + alpha * v * v) * laplacian_u(p) - 2.0 * alpha * v * (g[0] * g[0] + g[1] * g[1]);
}

/// Closed forms of J1..J3 for the manufactured solution; J4 has no closed form.
inline std::array<double, 4> qoi_values()
{
    using std::exp;
    constexpr double pi = std::numbers::pi;
    const double pi2 = pi * pi, pi4 = pi2 * pi2, pi6 = pi4 * pi2;
    const double e52 = exp(2.5), e5 = exp(5.0);
    const double j1 = 64.0 * pi2 * (e52 - 1.0) * (e52 - 1.0) * (e5 + e52 + 1.0) /
                      (e5 * (16.0 * pi2 + 25.0) * (16.0 * pi2 + 25.0));
    const double q = 256.0 * pi4 + 4000.0 * pi2 + 5625.0;
    const double j2 = 65536.0 * pi6 * (exp(15.0) + exp(45.0 / 4.0) + exp(15.0 / 4.0) + 1.0) /
                      (9.0 * exp(7.5) * q * q);
    const double j3 = 32.0 * pi4 * (e52 - 1.0) * (e52 - 1.0) * (e5 + e52 + 1.0) / (25.0 * e5 * (16.0 * pi2 + 25.0));
    constexpr double j4 = 5.67945022;
    return {j1, j2, j3, j4};
}

} // namespace manufactured

inline ProblemDefinition manufactured_problem(double alpha)
{
    if (!(alpha >= 0.0)) throw Error("manufactured_problem: alpha must be non-negative");
    ProblemDefinition p;
    p.name = "manufactured";
    p.alpha = alpha;
    p.forcing = [alpha](const Point& x) { return manufactured::forcing(x, alpha); };
    p.exact = ExactSolution{manufactured::u, manufactured::grad_u};
    p.qoi_values = manufactured::qoi_values();
    p.qoi_values_exact = true;
    return p;
}

/// Constant forcing f = 100 with alpha = 1e-2; the solution has gradient
/// singularities at the re-entrant corners of the hole.
inline ProblemDefinition singular_problem()
{
    ProblemDefinition p;
    p.name = "singular";
    p.alpha = 1e-2;
    p.forcing = [](const Point&) { return 100.0; };
    p.qoi_values = {6.540644835, 1.238067612e1, 1.596007278e2, 9.391778787};
    p.qoi_values_exact = false;
    return p;
}

inline ProblemDefinition make_problem(std::string_view name, double alpha)
{
    if (name == "manufactured") return manufactured_problem(alpha);
    if (name == "singular") return singular_problem();
    throw Error("unknown problem '" + std::string(name) + "'");
}

/// Nonlinearity sweep used by the verification studies.
inline constexpr std::array<double, 5> alpha_grid{0.0, 1e-4, 1e-3, 1e-2, 1e-1};

} // namespace goalest
