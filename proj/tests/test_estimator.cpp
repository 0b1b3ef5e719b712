#include "support.hpp"

#include <gtest/gtest.h>

using namespace goalest;
using namespace goalest::testing;

namespace {

EstimationResult pass(QoI q, double alpha, int refinements = 0)
{
    const auto mesh = mesh_ptr(refinements);
    const FunctionSpace coarse(mesh, 1), fine(mesh, 2);
    return run_estimation_pass(coarse, fine, manufactured_problem(alpha), q);
}

} // namespace

TEST(Eta1, ExactForLinearProblemAndLinearQoi)
{
    const auto r = pass(QoI::J1, 0.0).report;
    EXPECT_LE(std::abs(r.eta1 - r.E_h), 1e-9);
    EXPECT_LE(std::abs(r.eta2 - r.E_h), 1e-9);
    EXPECT_LE(std::abs(r.eta1 + r.eta_RL - r.E_h), 1e-9);
    EXPECT_TRUE(r.linear_qoi);
}

TEST(Eta1, StandaloneMatchesPass)
{
    const auto mesh = mesh_ptr();
    const FunctionSpace coarse(mesh, 1), fine(mesh, 2);
    const auto problem = manufactured_problem(1e-2);
    const auto res = run_estimation_pass(coarse, fine, problem, QoI::J2);
    const auto e1 = compute_eta1(fine, problem, res.fields.u_coarse_fine, QoI::J2);
    EXPECT_NEAR(e1.eta1, res.report.eta1, 1e-12 * std::abs(e1.eta1));
}

TEST(Eta1, QuadraticQoiIsNotEffective)
{
    // the linearization error dominates: eta1 misses the error badly for J3
    const auto r = pass(QoI::J3, 1e-2).report;
    EXPECT_TRUE(std::isfinite(r.eta1));
    EXPECT_GT(std::abs(r.eff_eta1_Eh() - 1.0), 0.5);
}

TEST(Eta1, InvariantUnderSubtractingCoarseInterpolant)
{
    const auto mesh = mesh_ptr();
    const FunctionSpace coarse(mesh, 1), fine(mesh, 2);
    const auto res = run_estimation_pass(coarse, fine, manufactured_problem(1e-2), QoI::J2);
    const auto& z = res.fields.z_h;
    const CoefficientVector zH = prolong(coarse, restrict(fine, z, coarse), fine);
    const double with_full = -z.dot(res.fields.residual);
    const double with_difference = -(z - zH).dot(res.fields.residual);
    EXPECT_LE(std::abs(with_full - with_difference), 1e-9);
}

TEST(ResidualLinearizationError, VanishesForLinearProblem)
{
    const auto r = pass(QoI::J1, 0.0).report;
    EXPECT_LE(r.ERL_norm, 1e-9);
    EXPECT_LE(std::abs(r.eta_RL), 1e-9);
}

TEST(ResidualLinearizationError, DecreasesUnderRefinement)
{
    double previous = std::numeric_limits<double>::infinity();
    for (int level = 0; level < 3; ++level) {
        const double norm = pass(QoI::J1, 1e-2, level).report.ERL_norm;
        EXPECT_LT(norm, previous) << "level " << level;
        previous = norm;
    }
}

TEST(ResidualLinearizationError, ZeroIncrementGivesNegativeResidual)
{
    const auto mesh = mesh_ptr();
    const FunctionSpace coarse(mesh, 1), fine(mesh, 2);
    const auto problem = manufactured_problem(1e-2);
    const auto uc = newton_primal(coarse, problem, coarse.zeros());
    const CoefficientVector uHh = prolong(coarse, uc.u, fine);
    const CoefficientVector erl = compute_residual_linearization_error(fine, problem, uHh, uHh);
    const CoefficientVector r = assemble_residual(fine, problem, uHh);
    EXPECT_GT(r.norm(), 0.0);
    EXPECT_LE((erl + r).norm(), 1e-15 * r.norm());
}

TEST(ResidualLinearizationError, DirichletEntriesZero)
{
    const auto mesh = mesh_ptr();
    const FunctionSpace fine(mesh, 2);
    const auto res = pass(QoI::J1, 1e-1);
    for (std::size_t i = 0; i < fine.dof_count(); ++i)
        if (fine.is_dirichlet(i)) EXPECT_EQ(res.fields.residual_linearization_error[static_cast<Eigen::Index>(i)], 0.0);
}

TEST(AdjointVerification, UnityAcrossAlphaSweep)
{
    const auto mesh = mesh_ptr();
    const FunctionSpace coarse(mesh, 1), fine(mesh, 2);
    for (double alpha : alpha_grid) {
        const auto problem = manufactured_problem(alpha);
        const auto uc = newton_primal(coarse, problem, coarse.zeros());
        const auto uf = newton_primal(fine, problem, prolong(coarse, uc.u, fine));
        const auto v = verify_adjoint(coarse, fine, problem, uc.u, uf.u, QoI::J1);
        EXPECT_FALSE(v.indeterminate);
        EXPECT_TRUE(v.passed(1e-6)) << "alpha " << alpha << " I_v " << v.I_v;
        if (alpha == 0.0) EXPECT_LE(std::abs(v.eta_RL), 1e-9);
    }
}

TEST(AdjointVerification, DetectsCorruptedAdjoint)
{
    const auto res = pass(QoI::J1, 1e-2);
    const auto& f = res.fields;
    const double good = adjoint_verification_ratio(res.report.E_h, f.z_h, f.residual, f.residual_linearization_error);
    const double bad =
        adjoint_verification_ratio(res.report.E_h, 1.01 * f.z_h, f.residual, f.residual_linearization_error);
    EXPECT_LE(std::abs(good - 1.0), 1e-6);
    EXPECT_GT(std::abs(bad - 1.0), 1e-4);
}

TEST(AdjointVerification, ErrorNormGrowsWithAlpha)
{
    const auto mesh = mesh_ptr();
    const FunctionSpace coarse(mesh, 1), fine(mesh, 2);
    double previous = -1.0;
    for (double alpha : alpha_grid) {
        const auto problem = manufactured_problem(alpha);
        const auto uc = newton_primal(coarse, problem, coarse.zeros());
        const auto uf = newton_primal(fine, problem, prolong(coarse, uc.u, fine));
        const double norm = verify_adjoint(coarse, fine, problem, uc.u, uf.u, QoI::J1).ERL_norm;
        EXPECT_GT(norm, previous);
        previous = norm;
    }
}

TEST(Eta2, ExactForNonlinearQois)
{
    for (int level : {0, 1})
        for (QoI q : {QoI::J2, QoI::J3, QoI::J4}) {
            const auto r = pass(q, 1e-2, level).report;
            EXPECT_LE(std::abs(r.eff_eta2_Eh() - 1.0), 1e-8) << to_string(q) << " level " << level;
        }
}

TEST(Eta2, ExactOverAlphaSweep)
{
    for (double alpha : alpha_grid)
        for (QoI q : all_qois) {
            const auto r = pass(q, alpha).report;
            EXPECT_LE(std::abs(r.eff_eta2_Eh() - 1.0), 1e-8) << to_string(q) << " alpha " << alpha;
        }
}

TEST(Eta2, LinearQoiModifiedAdjointEqualsAdjoint)
{
    const auto res = pass(QoI::J1, 1e-1);
    EXPECT_LE((res.fields.z_star - res.fields.z_h).norm(), 1e-12 * res.fields.z_h.norm());
    EXPECT_LE(std::abs(res.report.eff_eta2_Eh() - 1.0), 1e-8);
}

TEST(Eta2, LinearProblemNeedsNoCorrection)
{
    const auto res = pass(QoI::J3, 0.0);
    const auto& f = res.fields;
    EXPECT_LE((f.z_star_star - f.z_star).norm(), 1e-8 * f.z_star.norm());
    EXPECT_LE(std::abs(res.report.eff_eta2_Eh() - 1.0), 1e-8);
}

TEST(Eta2, LeastSquaresIdentity)
{
    const auto res = pass(QoI::J2, 1e-1);
    const auto& f = res.fields;
    const double lhs = f.z_star_star.dot(f.residual);
    const double rhs = f.z_star.dot(f.residual + f.residual_linearization_error);
    EXPECT_LE(std::abs(lhs - rhs), 1e-12 * std::abs(rhs));
}

TEST(Eta2, StandaloneMatchesPass)
{
    const auto mesh = mesh_ptr();
    const FunctionSpace coarse(mesh, 1), fine(mesh, 2);
    const auto problem = manufactured_problem(1e-2);
    const auto res = run_estimation_pass(coarse, fine, problem, QoI::J4);
    const auto e2 = compute_eta2(fine, problem, res.fields.u_coarse_fine, res.fields.u_fine, QoI::J4);
    EXPECT_NEAR(e2.eta2, res.report.eta2, 1e-12 * std::abs(e2.eta2));
    EXPECT_NEAR(e2.theta.theta, res.report.theta_star, 1e-14);
}

TEST(Eta2, ExactCoarseSolutionIsFlagged)
{
    // the zero state solves the unforced problem on every space
    ProblemDefinition p;
    p.name = "homogeneous";
    p.alpha = 1e-2;
    p.forcing = [](const Point&) { return 0.0; };
    const auto mesh = mesh_ptr();
    const FunctionSpace fine(mesh, 2);
    const auto e2 = compute_eta2(fine, p, fine.zeros(), fine.zeros(), QoI::J3);
    EXPECT_TRUE(e2.exact_coarse);
    EXPECT_EQ(e2.eta2, 0.0);
}

TEST(EstimationPass, ReportConsistency)
{
    const auto res = pass(QoI::J2, 1e-2);
    const auto& r = res.report;
    const auto exact = manufactured::qoi_values()[qoi_index(QoI::J2)];
    ASSERT_TRUE(r.E_exact.has_value());
    EXPECT_DOUBLE_EQ(*r.E_exact, exact - r.J_coarse);
    EXPECT_NEAR(r.I_v * r.E_h, r.eta1 + r.eta_RL, 1e-12 * std::abs(r.E_h));
    EXPECT_EQ(r.n_elements, 192u);
    EXPECT_GT(r.newton_coarse, 0);
    EXPECT_GE(r.newton_fine, 0);
    EXPECT_FALSE(r.unreliable_denominator);
    EXPECT_DOUBLE_EQ(r.corrected_eta2(), r.J_coarse + r.eta2);
}

TEST(EstimationPass, Eta1OnlySkipsFineSolve)
{
    const auto mesh = mesh_ptr();
    const FunctionSpace coarse(mesh, 1), fine(mesh, 2);
    PassOptions opts;
    opts.with_eta2 = false;
    const auto r = run_estimation_pass(coarse, fine, manufactured_problem(1e-2), QoI::J2, opts).report;
    EXPECT_TRUE(std::isfinite(r.eta1));
    EXPECT_TRUE(std::isnan(r.eta2));
    EXPECT_TRUE(std::isnan(r.E_h));
}

TEST(EstimationPass, CorrectedFunctionalImprovesOnUniformSequence)
{
    const double exact = manufactured::qoi_values()[qoi_index(QoI::J2)];
    for (int level = 0; level < 3; ++level) {
        const auto r = pass(QoI::J2, 1e-2, level).report;
        EXPECT_LT(std::abs(exact - r.corrected_eta2()), std::abs(exact - r.J_coarse)) << "level " << level;
    }
}
