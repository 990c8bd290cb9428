#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"

using namespace blaschke;
using blaschke::testing::Coarse;

namespace {

double worst_automorphy(const CubicDifferential& q, const FuchsianGroup& group) {
  double worst = 0.0;
  for (Complex z : {Complex(0.1, 0.2), Complex(-0.3, 0.1), Complex(0.2, -0.35), Complex(0.0, 0.0)})
    for (const auto& g : group.generators) worst = std::max(worst, q.automorphy_residual(g, z));
  return worst;
}

}  // namespace

TEST(CubicDifferential, AutomorphyImprovesWithTruncation) {
  const auto group = octagon_group();
  const double coarse = worst_automorphy(poincare_series(group, generic_seed(), 3), group);
  const double fine = worst_automorphy(poincare_series(group, generic_seed(), 6), group);
  EXPECT_LT(fine, coarse / 100.0);
  EXPECT_LT(fine, 2e-5);
}

TEST(CubicDifferential, LastLevelShrinks) {
  const auto group = octagon_group();
  const Complex z(0.15, -0.1);
  const double l4 = std::abs(poincare_series(group, generic_seed(), 4).last_level(z));
  const double l6 = std::abs(poincare_series(group, generic_seed(), 6).last_level(z));
  EXPECT_LT(l6, l4);
}

TEST(CubicDifferential, LinearInSeedAndScaling) {
  const auto group = octagon_group();
  auto words = std::make_shared<const WordTable>(enumerate_words(group, 4));
  const SeedPolynomial a{Complex(1.0, 0.0), Complex(0.0, 0.0), Complex(0.0, 0.0)};
  const SeedPolynomial b{Complex(0.0, 0.0), Complex(0.0, 0.0), Complex(0.3, -0.7)};
  const SeedPolynomial ab{a[0] + b[0], a[1] + b[1], a[2] + b[2]};
  const CubicDifferential qa(a, 4, words), qb(b, 4, words), qab(ab, 4, words);
  const Complex c(0.4, 1.3);
  std::mt19937_64 rng(3);
  for (int i = 0; i < 20; ++i) {
    const Complex z = blaschke::testing::random_disk_point(rng, 0.5);
    EXPECT_LT(std::abs(qab(z) - qa(z) - qb(z)), 1e-12 * (1.0 + std::abs(qab(z))));
    EXPECT_LT(std::abs(qa.scaled(c)(z) - c * qa(z)), 1e-12 * (1.0 + std::abs(qa(z))));
  }
}

TEST(CubicDifferential, DerivativeMatchesDifferenceQuotient) {
  const auto q = poincare_series(octagon_group(), generic_seed(), 4);
  const Complex z(0.2, 0.1), h(1e-6, 0.0);
  const Complex numeric = (q(z + h) - q(z - h)) / (2.0 * h);
  EXPECT_LT(std::abs(numeric - q.derivative(z)), 1e-6 * std::abs(q.derivative(z)));
}

TEST(CubicDifferential, PointwiseNormIsInvariant) {
  const auto group = octagon_group();
  const auto q = poincare_series(group, generic_seed(), 6);
  for (const auto& g : group.generators) {
    const Complex z(0.05, -0.12);
    EXPECT_NEAR(pointwise_norm(q, g(z)), pointwise_norm(q, z), 1e-4 * pointwise_norm(q, z));
  }
}

TEST(CubicDifferential, ZeroSeedGivesZeroSamples) {
  const auto& c = Coarse::get();
  const auto q = poincare_series(c.group, SeedPolynomial{}, 3);
  EXPECT_TRUE(q.is_zero());
  EXPECT_EQ(sample_differential(q, c.mesh).norm2.cwiseAbs().maxCoeff(), 0.0);
}

TEST(CubicDifferential, InnerProductIsHermitianAndPositive) {
  const auto& c = Coarse::get();
  const auto other = poincare_series(c.group, SeedPolynomial{Complex(0.0), Complex(1.0), Complex(0.0)}, 5);
  const Complex ab = l2_inner(c.q, other, c.mesh), ba = l2_inner(other, c.q, c.mesh);
  EXPECT_LT(std::abs(ab - std::conj(ba)), 1e-12 * std::abs(ab));
  const Complex aa = l2_inner(c.q, c.q, c.mesh);
  EXPECT_GT(aa.real(), 0.0);
  EXPECT_NEAR(aa.real(), c.mesh.mass.dot(c.samples.norm2), 1e-12 * aa.real());
  EXPECT_NEAR(aa.imag(), 0.0, 1e-14 * aa.real());
}

// A cubic differential on a genus-2 surface has 3(2g - 2) = 6 zeros.
TEST(CubicDifferential, ZeroCountIsSix) {
  const auto& c = Coarse::get();
  for (const auto& seed : {generic_seed(), SeedPolynomial{Complex(0.2, 0.0), Complex(0.0, 1.0), Complex(0.7, 0.1)}}) {
    const auto q = poincare_series(c.group, seed, 6);
    const auto zeros = find_zeros(q, c.group, c.mesh);
    EXPECT_EQ(zeros.total, 6);
    // Reduced zeros carry the automorphy defect of the truncated series.
    for (Complex z : zeros.points) EXPECT_LT(std::abs(q(z)), 1e-3 * probe_max_modulus(q, c.group));
  }
}
