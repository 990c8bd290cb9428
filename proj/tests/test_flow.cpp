#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "blaschke/flow.hpp"
#include "fixtures.hpp"

using namespace blaschke;
using blaschke::testing::Coarse;

namespace {

double angle_gap(double a, double b) { return std::abs(std::remainder(a - b, 2.0 * std::numbers::pi)); }

const WordTable& words4() {
  static const WordTable table = enumerate_words(octagon_group(), 4);
  return table;
}

}  // namespace

TEST(Flow, ReductionPreservesTheTangentVector) {
  const auto group = octagon_group();
  std::mt19937_64 rng(21);
  for (int i = 0; i < 100; ++i) {
    const Complex z = blaschke::testing::random_disk_point(rng, 0.97);
    const auto s = reduce_state(group, z, 0.4);
    EXPECT_TRUE(group.contains(s.point, 1e-9));
    EXPECT_LT(std::abs(s.lift() - z), 1e-9 / (1.0 - std::abs(z)));
    EXPECT_LT(angle_gap(s.lift_angle(), 0.4), 1e-8);
  }
}

TEST(Flow, StepsComposeAndMoveUnitSpeed) {
  const auto group = octagon_group();
  std::mt19937_64 rng(22);
  for (int i = 0; i < 50; ++i) {
    const auto start = sample_liouville(group, rng);
    const auto once = flow_step(group, start, 1.7);
    const auto twice = flow_step(group, flow_step(group, start, 0.9), 0.8);
    EXPECT_LT(std::abs(once.lift() - twice.lift()), 1e-8);
    EXPECT_LT(angle_gap(once.lift_angle(), twice.lift_angle()), 1e-8);
    EXPECT_NEAR(hyperbolic_distance(start.lift(), once.lift()), 1.7, 1e-8);
    EXPECT_TRUE(group.contains(once.point, 1e-9));
  }
}

TEST(Flow, LiouvilleSamplesAreUniform) {
  const auto& c = Coarse::get();
  std::mt19937_64 rng(23);
  const int n = 20000;
  // Test function |z|^2 interpolated on the mesh and the cosine of the direction.
  ScalarField field(c.mesh.class_count());
  for (int k = 0; k < c.mesh.class_count(); ++k) field[k] = std::norm(c.mesh.class_point(k));
  const double exact = c.mesh.mass.dot(field) / c.mesh.total_mass();
  double sum = 0.0, sum2 = 0.0, cos_sum = 0.0;
  std::vector<int> sectors(16, 0);
  for (int i = 0; i < n; ++i) {
    const auto s = sample_liouville(c.group, rng);
    const double v = c.mesh.interpolate(field, s.point);
    sum += v;
    sum2 += v * v;
    cos_sum += std::cos(s.angle);
    const double theta = std::arg(s.point) + 2.0 * std::numbers::pi;
    ++sectors[static_cast<std::size_t>(std::floor(theta / (std::numbers::pi / 8.0))) % 16];
  }
  const double mean = sum / n, se = std::sqrt((sum2 / n - mean * mean) / n);
  EXPECT_LT(std::abs(mean - exact), 4.0 * se + 2e-3 * exact);
  EXPECT_LT(std::abs(cos_sum / n), 4.0 * std::sqrt(0.5 / n));
  double chi2 = 0.0;
  const double expected = n / 16.0;
  for (int count : sectors) chi2 += std::pow(count - expected, 2) / expected;
  // 15 degrees of freedom, 99.9% quantile 37.7.
  EXPECT_LT(chi2, 37.7);
}

TEST(Flow, BirkhoffIntegralConvergesUnderRefinement) {
  const auto group = octagon_group();
  std::mt19937_64 rng(24);
  const auto start = sample_liouville(group, rng);
  // A smooth function on the surface: the pointwise norm of a cubic differential.
  const auto q = poincare_series(group, generic_seed(), 5);
  const auto f = [&](const TangentState& s) { return pointwise_norm(q, s.point); };
  EXPECT_NEAR(birkhoff_integral(group, [](const TangentState&) { return 1.0; }, start, 7.3, 0.05), 7.3, 1e-12);
  const double coarse = birkhoff_integral(group, f, start, 10.0, 0.04);
  const double fine = birkhoff_integral(group, f, start, 10.0, 0.01);
  EXPECT_NEAR(coarse, fine, 1e-6 * std::abs(fine));
  EXPECT_THROW(birkhoff_integral(group, f, start, 10.0, 0.1), ConfigError);
}

TEST(Flow, MonteCarloBasics) {
  const auto& c = Coarse::get();
  McOptions options;
  options.horizon = 5.0;
  options.samples = 40;
  options.threads = 1;
  const auto zero = variance_mc(c.mesh, c.group, ScalarField::Zero(c.mesh.class_count()), options);
  EXPECT_EQ(zero.estimate, 0.0);
  EXPECT_EQ(zero.standard_error, 0.0);
  EXPECT_THROW(variance_mc(c.mesh, c.group, ScalarField::Ones(c.mesh.class_count()), options), ConfigError);

  const auto spectrum = eigensolve(c.op, 5);
  const ScalarField phi = spectrum.modes.col(1);
  const auto serial = variance_mc(c.mesh, c.group, phi, options);
  options.threads = 3;
  const auto threaded = variance_mc(c.mesh, c.group, phi, options);
  EXPECT_EQ(serial.estimate, threaded.estimate);
  EXPECT_EQ(serial.standard_error, threaded.standard_error);
  EXPECT_GT(serial.estimate, 0.0);
  options.seed = 2;
  EXPECT_NE(variance_mc(c.mesh, c.group, phi, options).estimate, serial.estimate);
}

TEST(Flow, SmoothFieldIsInvariantAndReproducesConstants) {
  const auto& c = Coarse::get();
  const auto spectrum = eigensolve(c.op, 5);
  const SmoothField f(c.mesh, c.group, words4(), spectrum.modes.col(2), 0.45);
  EXPECT_GT(f.lift_count(), static_cast<std::size_t>(c.mesh.class_count()));
  for (int k = 0; k < 8; ++k) {
    const Complex z = c.group.side_point(k, 0.3);
    const Complex gz = c.group.generators[static_cast<std::size_t>((k + 4) % 8)](z);
    EXPECT_NEAR(f.value(z), f.value(gz), 1e-12);
  }
  const SmoothField one(c.mesh, c.group, words4(), ScalarField::Constant(c.mesh.class_count(), 2.5), 0.45);
  EXPECT_NEAR(one.value(Complex(0.1, 0.2)), 2.5, 1e-12);
  const auto jet = one.jet(Complex(-0.2, 0.3));
  EXPECT_NEAR(jet.fx, 0.0, 1e-7);
  EXPECT_NEAR(jet.fyy, 0.0, 1e-3);
}

TEST(Flow, ClosedGeodesicIntegrals) {
  const auto group = octagon_group();
  const auto& words = words4();
  for (std::size_t e = words.level_offsets[1]; e < words.level_offsets[3]; e += 7) {
    const auto& g = words.elements[e];
    const double length = axis_data(g).translation_length;
    EXPECT_NEAR(closed_geodesic_integral(group, g, 64, [](const TangentState&) { return 1.0; }), length,
                1e-12 * length);
  }
}

TEST(Flow, XrayVanishesOnPotentialsOnly) {
  const auto& c = Coarse::get();
  const auto spectrum = eigensolve(c.op, 5);
  const auto field = std::make_shared<const SmoothField>(c.mesh, c.group, words4(), spectrum.modes.col(1), 0.45);
  const auto chi = exact_form(field);
  const double sup = sup_norm(c.mesh, chi);
  ASSERT_GT(sup, 0.0);
  const auto& words = words4();
  const auto zero_form = OneFormField([](Complex) { return CovectorJet{}; });
  for (std::size_t e : {words.level_offsets[1], words.level_offsets[2] + 3, words.level_offsets[3] + 11}) {
    const auto& g = words.elements[e];
    EXPECT_LT(xray_check(c.group, chi, g, 1024), 1e-3 * sup);
    EXPECT_EQ(xray_check(c.group, zero_form, g, 64), 0.0);
    const double control = std::abs(closed_geodesic_integral(
        c.group, g, 1024, [&](const TangentState& s) { return 1.0 + c.mesh.interpolate(c.samples.norm2, s.point); }));
    EXPECT_GT(control, 1e-2);
  }
}
