#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "fixtures.hpp"

using namespace blaschke;
using blaschke::testing::Coarse;

namespace {

const FamilySweep& coarse_sweep() {
  static const FamilySweep sweep = [] {
    const auto& c = Coarse::get();
    return sweep_family(c.mesh, c.op, c.samples.norm2, {0.0, 0.1, 1.0, 10.0, 100.0, 1000.0});
  }();
  return sweep;
}

}  // namespace

TEST(Wang, SupersolutionRootSolvesCubic) {
  EXPECT_EQ(supersolution_root(0.0), 1.0);
  for (double a : {1e-8, 0.3, 1.0, 17.0, 1e6}) {
    const double x = supersolution_root(a);
    EXPECT_GT(x, 1.0);
    EXPECT_NEAR(x * x * x - x * x, 2.0 * a, 1e-13 * (1.0 + 2.0 * a));
  }
  EXPECT_THROW(supersolution_root(-1.0), ConfigError);
}

TEST(Wang, HyperbolicBaselineIsZero) {
  const auto& c = Coarse::get();
  const ScalarField zero = ScalarField::Zero(c.op.size());
  EXPECT_LT(solve_wang(c.op, c.samples.norm2, 0.0, zero).u.cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT(solve_wang(c.op, zero, 5.0, zero).u.cwiseAbs().maxCoeff(), 1e-12);
  // From a perturbed start Newton returns to the hyperbolic metric.
  const ScalarField start = ScalarField::Constant(c.op.size(), 0.3);
  EXPECT_LT(solve_wang(c.op, zero, 0.0, start).u.cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Wang, SolutionDependsOnlyOnProduct) {
  const auto& c = Coarse::get();
  const ScalarField zero = ScalarField::Zero(c.op.size());
  const auto a = solve_wang(c.op, ScalarField(4.0 * c.samples.norm2), 2.5, zero);
  const auto b = solve_wang(c.op, c.samples.norm2, 10.0, zero);
  EXPECT_LT((a.u - b.u).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Wang, SweepInvariants) {
  const auto& c = Coarse::get();
  const auto& sweep = coarse_sweep();
  for (std::size_t i = 0; i < sweep.points.size(); ++i) {
    const auto& p = sweep.points[i];
    SCOPED_TRACE("t = " + std::to_string(p.t));
    EXPECT_LT(p.residual, 1e-10);
    EXPECT_LT(p.certificate, 1e-9);
    EXPECT_GE(p.u_min, 0.0);
    EXPECT_LE(p.u_max, p.envelope + 1e-8);
    EXPECT_NEAR(p.total_curvature, -4.0 * std::numbers::pi, 5e-3 * 4.0 * std::numbers::pi);
    EXPECT_NEAR(p.area, c.mesh.mass.dot(ScalarField(p.u.array().exp())), 1e-12 * p.area);
    if (p.t > 0.0) {
      EXPECT_GT(p.udot.minCoeff(), 0.0);
      EXPECT_GT(p.udot.maxCoeff() - p.udot.minCoeff(), 0.0);
    }
    if (i > 0) {
      EXPECT_GE((p.u - sweep.points[i - 1].u).minCoeff(), -1e-8);
      EXPECT_GT(p.area, sweep.points[i - 1].area);
    }
  }
}

TEST(Wang, DerivativeMatchesFiniteDifference) {
  const auto& c = Coarse::get();
  const double t = 1.0, h = 1e-4;
  const ScalarField zero = ScalarField::Zero(c.op.size());
  const auto plus = solve_wang(c.op, c.samples.norm2, t + h, zero);
  const auto minus = solve_wang(c.op, c.samples.norm2, t - h, zero);
  const auto mid = solve_wang(c.op, c.samples.norm2, t, zero);
  const ScalarField numeric = (plus.u - minus.u) / (2.0 * h);
  const ScalarField udot = solve_udot(c.op, c.samples.norm2, t, mid.u);
  EXPECT_LT((numeric - udot).cwiseAbs().maxCoeff(), 1e-6 * udot.cwiseAbs().maxCoeff());
}

TEST(Wang, TwoSolvesAgreeAtZero) {
  const auto& c = Coarse::get();
  const ScalarField a = solve_udot(c.op, c.samples.norm2, 0.0, ScalarField::Zero(c.op.size()));
  const ScalarField b = solve_hyperbolic_derivative(c.op, c.samples.norm2);
  EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-9 * a.cwiseAbs().maxCoeff());
  // Integrating the equation for w against constants gives 2 <1, w> = 4 ||q||^2.
  EXPECT_NEAR(c.mesh.mass.dot(a) / c.mesh.total_mass(), c.mesh.mass.dot(c.samples.norm2) / (2.0 * std::numbers::pi),
              1e-10 * c.mesh.mass.dot(a));
}

TEST(Wang, CircleActionLeavesSolutionUnchanged) {
  const auto& c = Coarse::get();
  const auto rotated = sample_differential(c.q.scaled(std::polar(1.0, 1.1)), c.mesh);
  EXPECT_LT((rotated.norm2 - c.samples.norm2).cwiseAbs().maxCoeff(), 1e-12 * c.samples.norm2.maxCoeff());
}

TEST(Wang, FlatLimitErrorDecreases) {
  const auto& c = Coarse::get();
  const auto zeros = find_zeros(c.q, c.group, c.mesh);
  const auto keep = zero_free_classes(c.mesh, c.group, zeros.points, 0.2);
  ASSERT_FALSE(keep.empty());
  ASSERT_LT(keep.size(), static_cast<std::size_t>(c.mesh.class_count()));
  const auto rows = flat_limit_report(c.mesh, coarse_sweep(), c.samples.f, keep);
  double previous = 1e300;
  for (const auto& r : rows) {
    if (r.t < 10.0) continue;
    EXPECT_LT(r.sup_error, previous);
    previous = r.sup_error;
  }
}

TEST(Wang, LogGridAndValidation) {
  const auto g = log_grid(1e-2, 1e4, 20, true);
  ASSERT_EQ(g.size(), 21u);
  EXPECT_EQ(g.front(), 0.0);
  EXPECT_EQ(g[1], 1e-2);
  EXPECT_EQ(g.back(), 1e4);
  for (std::size_t i = 1; i < g.size(); ++i) EXPECT_GT(g[i], g[i - 1]);
  const auto& c = Coarse::get();
  EXPECT_THROW(solve_wang(c.op, c.samples.norm2, -1.0, ScalarField::Zero(c.op.size())), ConfigError);
  EXPECT_THROW(sweep_family(c.mesh, c.op, c.samples.norm2, {1.0, 0.5}), ConfigError);
  EXPECT_THROW(log_grid(1.0, 0.5, 5, false), ConfigError);
}
