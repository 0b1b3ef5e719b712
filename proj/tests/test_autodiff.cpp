#include "support.hpp"

#include <gtest/gtest.h>

#include <vector>

using namespace goalest;
using namespace goalest::testing;
using ad::Dual;
using ad::Taylor2;

namespace {

// Two subdomain triangles with no boundary: every dof is free.
std::shared_ptr<const Mesh> two_triangle_patch()
{
    Mesh m;
    m.vertices = {{0.5, -1.0}, {1.0, -1.0}, {1.0, -0.5}, {0.5, -0.5}};
    m.triangles = {{0, 1, 2}, {0, 2, 3}};
    m.region = {Region::Subdomain, Region::Subdomain};
    return std::make_shared<const Mesh>(std::move(m));
}

} // namespace

TEST(Dual, SingleSeed)
{
    const std::vector<double> c{3.0};
    const auto s = ad::lift_element_dofs<1>(c);
    EXPECT_EQ(s[0].value, 3.0);
    EXPECT_EQ(s[0].d[0], 1.0);
}

TEST(Dual, SquareAndProduct)
{
    const std::vector<double> x{2.0};
    const auto sx = ad::lift_element_dofs<1>(x);
    const auto sq = sx[0] * sx[0];
    EXPECT_EQ(sq.value, 4.0);
    EXPECT_EQ(sq.d[0], 4.0);

    const std::vector<double> xy{2.0, 5.0};
    const auto s = ad::lift_element_dofs<2>(xy);
    const auto p = s[0] * s[1];
    EXPECT_EQ(p.value, 10.0);
    EXPECT_EQ(p.d[0], 5.0);
    EXPECT_EQ(p.d[1], 2.0);
}

TEST(Dual, SeedsBeyondInputStayZero)
{
    const std::vector<double> c{1.0, 2.0};
    const auto s = ad::lift_element_dofs<6>(c);
    for (int i = 2; i < 6; ++i) {
        EXPECT_EQ(s[i].value, 0.0);
        for (double d : s[i].d) EXPECT_EQ(d, 0.0);
    }
}

TEST(Dual, QuotientAndSqrtMatchFiniteDifferences)
{
    auto f = [](const auto& x, const auto& y) {
        using std::sqrt;
        using ad::sqrt;
        return sqrt(x * x + 3.0 * y) / (1.0 + x * y) - 2.0 * x + y / 4.0;
    };
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> d(0.2, 1.5);
    for (int trial = 0; trial < 5; ++trial) {
        const std::vector<double> c{d(rng), d(rng)};
        const auto s = ad::lift_element_dofs<2>(c);
        const auto r = f(s[0], s[1]);
        const double h = 1e-6;
        const double fx = (f(c[0] + h, c[1]) - f(c[0] - h, c[1])) / (2 * h);
        const double fy = (f(c[0], c[1] + h) - f(c[0], c[1] - h)) / (2 * h);
        EXPECT_NEAR(r.value, f(c[0], c[1]), 1e-15);
        EXPECT_LE(relative_error(r.d[0], fx), 1e-8);
        EXPECT_LE(relative_error(r.d[1], fy), 1e-8);
    }
}

TEST(Taylor2, ArithmeticMatchesFiniteDifferences)
{
    auto f = [](const auto& t) {
        using std::sqrt;
        using ad::sqrt;
        return (t * t * t - 2.0 * t) / (1.0 + t * t) + sqrt(2.0 + t) - (3.0 - t);
    };
    for (double t0 : {-0.7, 0.1, 0.5, 1.3}) {
        const Taylor2 r = f(Taylor2(t0, 1.0, 0.0));
        const double h = 1e-4;
        const double d1 = (f(t0 + h) - f(t0 - h)) / (2 * h);
        const double d2 = (f(t0 + h) - 2 * f(t0) + f(t0 - h)) / (h * h);
        EXPECT_NEAR(r.value, f(t0), 1e-15);
        EXPECT_LE(relative_error(r.first, d1), 1e-7);
        EXPECT_LE(relative_error(r.second, d2), 1e-5);
    }
}

TEST(SecondDirectional, QuadraticFormGivesTwiceNormSquared)
{
    std::mt19937 rng(4);
    std::uniform_real_distribution<double> d(-1, 1);
    std::vector<double> base(9), dir(9);
    for (auto& b : base) b = d(rng);
    for (auto& e : dir) e = d(rng);
    auto sum_sq = [](std::span<const Taylor2> u) {
        Taylor2 s;
        for (const auto& x : u) s += x * x;
        return s;
    };
    double e2 = 0.0;
    for (double e : dir) e2 += e * e;
    for (double theta : {0.0, 0.3, 1.0}) {
        const Taylor2 r = ad::second_directional(sum_sq, base, dir, theta);
        EXPECT_NEAR(r.second, 2.0 * e2, 1e-13);
    }
}

TEST(SecondDirectional, LinearFunctionHasZeroCurvature)
{
    const std::vector<double> base{1.0, 2.0, 3.0}, dir{0.5, -1.0, 2.0};
    auto lin = [](std::span<const Taylor2> u) { return 2.0 * u[0] - u[1] + 0.25 * u[2]; };
    const Taylor2 r = ad::second_directional(lin, base, dir, 0.4);
    EXPECT_EQ(r.second, 0.0);
    EXPECT_DOUBLE_EQ(r.first, 2.0 * 0.5 + 1.0 + 0.5);
}

TEST(SecondDirectional, NonFiniteDerivativeIsSignalled)
{
    const std::vector<double> base{0.0}, dir{1.0};
    auto root = [](std::span<const Taylor2> u) { return ad::sqrt(u[0]); };
    EXPECT_THROW((void)ad::second_directional(root, base, dir, 0.0), std::domain_error);
}

TEST(SecondDirectional, CubicQoiOnPatchMatchesFiniteDifference)
{
    const FunctionSpace p2(two_triangle_patch(), 2);
    ASSERT_EQ(p2.dof_count(), 9u);
    for (unsigned seed : {1u, 2u, 3u}) {
        const CoefficientVector u = random_vector(p2, seed);
        const CoefficientVector e = random_vector(p2, seed + 100);
        const double theta = 0.37;
        const double h = 1e-5;
        const Taylor2 r = qoi_along_line(p2, QoI::J2, u, e, theta);
        const double fd2 = (qoi_along_line(p2, QoI::J2, u, e, theta + h).first -
                            qoi_along_line(p2, QoI::J2, u, e, theta - h).first) /
                           (2 * h);
        const double fd1 = (qoi_value(p2, QoI::J2, u + (theta + h) * e) - qoi_value(p2, QoI::J2, u + (theta - h) * e)) /
                           (2 * h);
        EXPECT_LE(relative_error(r.second, fd2), 1e-6);
        EXPECT_LE(relative_error(r.first, fd1), 1e-6);
        EXPECT_NEAR(r.value, qoi_value(p2, QoI::J2, u + theta * e), 1e-14);
    }
}

TEST(SecondDirectional, LineCurvatureEqualsHessianQuadraticForm)
{
    // e^T H e from second differences of the assembled gradient
    const FunctionSpace p2(two_triangle_patch(), 2);
    const CoefficientVector u = random_vector(p2, 21);
    const CoefficientVector e = random_vector(p2, 22);
    for (QoI q : {QoI::J2, QoI::J3, QoI::J4}) {
        const double h = 1e-6;
        const CoefficientVector hv =
            (assemble_qoi(p2, q, u + h * e).gradient - assemble_qoi(p2, q, u - h * e).gradient) / (2 * h);
        EXPECT_LE(relative_error(qoi_along_line(p2, q, u, e, 0.0).second, e.dot(hv)), 1e-6) << to_string(q);
    }
}
