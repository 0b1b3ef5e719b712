#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <type_traits>
#include <vector>

namespace goalest::ad {

/// Forward-mode dual number carrying N partial derivatives.
///
/// Used for element Jacobians and QoI gradients: the local dofs of one element
/// are seeded with unit partials, so N never exceeds the P2 local dof count.
template <std::size_t N>
struct Dual
{
    double value = 0.0;
    std::array<double, N> d{};

    constexpr Dual() = default;
    constexpr Dual(double v) : value(v) {} // NOLINT: implicit lift of constants

    Dual& operator+=(const Dual& o)
    {
        value += o.value;
        for (std::size_t i = 0; i < N; ++i) d[i] += o.d[i];
        return *this;
    }
    Dual& operator-=(const Dual& o)
    {
        value -= o.value;
        for (std::size_t i = 0; i < N; ++i) d[i] -= o.d[i];
        return *this;
    }
    Dual& operator*=(const Dual& o)
    {
        for (std::size_t i = 0; i < N; ++i) d[i] = d[i] * o.value + value * o.d[i];
        value *= o.value;
        return *this;
    }
    Dual& operator/=(const Dual& o)
    {
        const double inv = 1.0 / o.value;
        for (std::size_t i = 0; i < N; ++i) d[i] = (d[i] - value * inv * o.d[i]) * inv;
        value *= inv;
        return *this;
    }
};

template <std::size_t N> Dual<N> operator+(Dual<N> a, const Dual<N>& b) { return a += b; }
template <std::size_t N> Dual<N> operator-(Dual<N> a, const Dual<N>& b) { return a -= b; }
template <std::size_t N> Dual<N> operator*(Dual<N> a, const Dual<N>& b) { return a *= b; }
template <std::size_t N> Dual<N> operator/(Dual<N> a, const Dual<N>& b) { return a /= b; }
template <std::size_t N> Dual<N> operator+(Dual<N> a, double b) { a.value += b; return a; }
template <std::size_t N> Dual<N> operator+(double b, Dual<N> a) { a.value += b; return a; }
template <std::size_t N> Dual<N> operator-(Dual<N> a, double b) { a.value -= b; return a; }
template <std::size_t N> Dual<N> operator-(double b, const Dual<N>& a) { return Dual<N>(b) - a; }
template <std::size_t N>
Dual<N> operator*(Dual<N> a, double b)
{
    a.value *= b;
    for (auto& x : a.d) x *= b;
    return a;
}
template <std::size_t N> Dual<N> operator*(double b, Dual<N> a) { return a * b; }
template <std::size_t N> Dual<N> operator/(Dual<N> a, double b) { return a * (1.0 / b); }
template <std::size_t N> Dual<N> operator-(const Dual<N>& a) { return a * -1.0; }

template <std::size_t N>
Dual<N> sqrt(const Dual<N>& a)
{
    Dual<N> r;
    r.value = std::sqrt(a.value);
    const double s = 0.5 / r.value;
    for (std::size_t i = 0; i < N; ++i) r.d[i] = s * a.d[i];
    return r;
}

/// Seed element-local coefficients: seed i has value c[i] and partial e_i.
template <std::size_t N>
std::array<Dual<N>, N> lift_element_dofs(std::span<const double> coefficients)
{
    std::array<Dual<N>, N> seeds{};
    for (std::size_t i = 0; i < coefficients.size() && i < N; ++i) {
        seeds[i].value = coefficients[i];
        seeds[i].d[i] = 1.0;
    }
    return seeds;
}

/// Univariate Taylor polynomial truncated after the second derivative:
/// value, first and second derivatives with respect to one scalar parameter.
struct Taylor2
{
    double value = 0.0;
    double first = 0.0;
    double second = 0.0;

    constexpr Taylor2() = default;
    constexpr Taylor2(double v) : value(v) {} // NOLINT
    constexpr Taylor2(double v, double d1, double d2) : value(v), first(d1), second(d2) {}

    Taylor2& operator+=(const Taylor2& o)
    {
        value += o.value;
        first += o.first;
        second += o.second;
        return *this;
    }
    Taylor2& operator-=(const Taylor2& o)
    {
        value -= o.value;
        first -= o.first;
        second -= o.second;
        return *this;
    }
    Taylor2& operator*=(const Taylor2& o)
    {
        second = second * o.value + 2.0 * first * o.first + value * o.second;
        first = first * o.value + value * o.first;
        value *= o.value;
        return *this;
    }
};

inline Taylor2 operator+(Taylor2 a, const Taylor2& b) { return a += b; }
inline Taylor2 operator-(Taylor2 a, const Taylor2& b) { return a -= b; }
inline Taylor2 operator*(Taylor2 a, const Taylor2& b) { return a *= b; }
inline Taylor2 operator+(Taylor2 a, double b) { a.value += b; return a; }
inline Taylor2 operator+(double b, Taylor2 a) { a.value += b; return a; }
inline Taylor2 operator-(Taylor2 a, double b) { a.value -= b; return a; }
inline Taylor2 operator-(double b, const Taylor2& a) { return {b - a.value, -a.first, -a.second}; }
inline Taylor2 operator*(const Taylor2& a, double b) { return {a.value * b, a.first * b, a.second * b}; }
inline Taylor2 operator*(double b, const Taylor2& a) { return a * b; }
inline Taylor2 operator-(const Taylor2& a) { return {-a.value, -a.first, -a.second}; }
inline Taylor2 operator/(const Taylor2& a, const Taylor2& b)
{
    const double q = a.value / b.value;
    const double q1 = (a.first - q * b.first) / b.value;
    const double q2 = (a.second - 2.0 * q1 * b.first - q * b.second) / b.value;
    return {q, q1, q2};
}

inline Taylor2 sqrt(const Taylor2& a)
{
    const double s = std::sqrt(a.value);
    const double s1 = 0.5 * a.first / s;
    const double s2 = (0.5 * a.second - s1 * s1) / s;
    return {s, s1, s2};
}

inline bool isfinite(const Taylor2& a)
{
    return std::isfinite(a.value) && std::isfinite(a.first) && std::isfinite(a.second);
}

/// Seed for evaluating along the line base + theta * direction.
inline Taylor2 line_seed(double base, double direction, double theta)
{
    return {base + theta * direction, direction, 0.0};
}

/// Evaluate a scalar function of a coefficient vector along the line
/// u(theta) = base + theta * direction, returning J, dJ/dtheta and d2J/dtheta2.
/// By the chain rule d2J/dtheta2 = direction^T H direction.
template <typename F>
Taylor2 second_directional(F&& f, std::span<const double> base, std::span<const double> direction, double theta)
{
    std::vector<Taylor2> u(base.size());
    for (std::size_t i = 0; i < base.size(); ++i) u[i] = line_seed(base[i], direction[i], theta);
    const Taylor2 r = f(std::span<const Taylor2>(u));
    if (!isfinite(r)) throw std::domain_error("second_directional: non-finite derivative along line");
    return r;
}

template <typename T> struct is_dual : std::false_type {};
template <std::size_t N> struct is_dual<Dual<N>> : std::true_type {};

inline double value_of(double x) { return x; }
template <std::size_t N> double value_of(const Dual<N>& x) { return x.value; }
inline double value_of(const Taylor2& x) { return x.value; }

} // namespace goalest::ad
