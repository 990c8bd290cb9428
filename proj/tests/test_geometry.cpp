#include <gtest/gtest.h>

#include <cmath>
#include <array>
#include <random>
#include <set>

#include "fixtures.hpp"

using namespace blaschke;
using blaschke::testing::Coarse;

TEST(Moebius, ActionPreservesHyperbolicDistance) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 200; ++i) {
    const auto g = blaschke::testing::random_isometry(rng);
    const Complex z = blaschke::testing::random_disk_point(rng), w = blaschke::testing::random_disk_point(rng);
    EXPECT_NEAR(hyperbolic_distance(g(z), g(w)), hyperbolic_distance(z, w), 1e-9 * (1.0 + hyperbolic_distance(z, w)));
  }
}

TEST(Moebius, CompositionAndInverse) {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 100; ++i) {
    const auto f = blaschke::testing::random_isometry(rng), g = blaschke::testing::random_isometry(rng);
    const Complex z = blaschke::testing::random_disk_point(rng);
    const Complex fg = (f * g)(z);
    EXPECT_LT(std::abs(fg - f(g(z))), 1e-12);
    EXPECT_LT((f * f.inverse()).distance(MoebiusTransform::identity()), 1e-12);
    EXPECT_NEAR((f * g).determinant(), 1.0, 1e-12);
  }
}

TEST(Moebius, FrameAndTranslation) {
  const Complex z(0.3, -0.2);
  const auto frame = MoebiusTransform::frame(z, 0.7);
  EXPECT_LT(std::abs(frame(Complex(0.0, 0.0)) - z), 1e-15);
  EXPECT_NEAR(std::arg(frame.derivative(Complex(0.0, 0.0))), 0.7, 1e-14);
  EXPECT_NEAR(MoebiusTransform::translation(1.3)(Complex(0.0, 0.0)).real(), std::tanh(0.65), 1e-15);
  EXPECT_NEAR(hyperbolic_distance(Complex(0.0, 0.0), Complex(std::tanh(0.65), 0.0)), 1.3, 1e-13);
}

TEST(Fuchsian, RelationIsIdentity) {
  const auto group = octagon_group();
  EXPECT_LT(relation_product(group).distance(MoebiusTransform::identity()), 1e-12);
  const std::array<int, 8> expected{0, 5, 2, 7, 4, 1, 6, 3};
  EXPECT_EQ(group.relation, expected);
}

TEST(Fuchsian, GeneratorsPairOppositeSides) {
  const auto group = octagon_group();
  for (int k = 0; k < 8; ++k) {
    const auto& g = group.generators[static_cast<std::size_t>(k)];
    EXPECT_LT((g * group.generators[static_cast<std::size_t>((k + 4) % 8)]).distance(MoebiusTransform::identity()),
              1e-12);
    EXPECT_NEAR(g.determinant(), 1.0, 1e-13);
    EXPECT_GT(std::abs(g.trace()), 2.0);
    EXPECT_NEAR(axis_data(g).translation_length, 3.0571, 1e-4);
    // g_k carries side k + 4 onto side k.
    for (double s : {-0.5, 0.0, 0.4})
      EXPECT_LT(std::abs(group.side_violation(g(group.side_point((k + 4) % 8, s)), k)), 1e-12);
  }
}

TEST(Fuchsian, AnglesSumToTwoPi) {
  const auto group = octagon_group();
  EXPECT_NEAR(8.0 * group.interior_angle(), 2.0 * std::numbers::pi, 1e-12);
}

TEST(Fuchsian, WordCountsByLevel) {
  const auto words = enumerate_words(octagon_group(), 4);
  const std::vector<std::size_t> counts{1, 8, 56, 392, 2736};
  ASSERT_EQ(words.level_offsets.size(), 6u);
  for (std::size_t n = 0; n < counts.size(); ++n)
    EXPECT_EQ(words.level_offsets[n + 1] - words.level_offsets[n], counts[n]) << "level " << n;
  std::set<std::array<long long, 4>> seen;
  for (const auto& g : words.elements) {
    const auto c = g.canonical();
    seen.insert({std::llround(c.a().real() * 1e8), std::llround(c.a().imag() * 1e8), std::llround(c.b().real() * 1e8),
                 std::llround(c.b().imag() * 1e8)});
  }
  EXPECT_EQ(seen.size(), words.size());
}

TEST(Fuchsian, ReductionLandsInDomain) {
  const auto group = octagon_group();
  std::mt19937_64 rng(11);
  for (int i = 0; i < 300; ++i) {
    const Complex z = blaschke::testing::random_disk_point(rng, 0.995);
    const auto red = reduce_to_domain(group, z);
    EXPECT_TRUE(group.contains(red.point, 1e-9));
    EXPECT_LT(std::abs(red.word(red.point) - z), 1e-9 / (1.0 - std::abs(z)));
  }
}

TEST(Mesh, MassEulerAndSign) {
  const auto& c = Coarse::get();
  EXPECT_NEAR(c.mesh.total_mass(), 4.0 * std::numbers::pi, 1e-12);
  EXPECT_EQ(euler_characteristic(c.mesh), -2);
  EXPECT_LE(max_offdiagonal(c.op.stiffness), 0.0);
  EXPECT_GT(c.op.mass.minCoeff(), 0.0);
}

TEST(Mesh, StiffnessSymmetricWithConstantKernel) {
  const auto& c = Coarse::get();
  const SparseMatrix diff = c.op.stiffness - SparseMatrix(c.op.stiffness.transpose());
  EXPECT_LT(diff.norm(), 1e-12 * c.op.stiffness.norm());
  const ScalarField ones = ScalarField::Ones(c.op.size());
  EXPECT_LT(c.op.apply(ones).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Mesh, InterpolationReproducesClassValues) {
  const auto& c = Coarse::get();
  ScalarField f(c.mesh.class_count());
  for (int k = 0; k < c.mesh.class_count(); ++k) f[k] = std::sin(3.0 * c.mesh.class_point(k).real()) + k % 5;
  for (int k = 0; k < c.mesh.class_count(); k += 17) EXPECT_NEAR(c.mesh.interpolate(f, c.mesh.class_point(k)), f[k], 1e-9);
}

TEST(Laplacian, ChristoffelSymbolsAnnihilateGeodesics) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  for (int i = 0; i < 50; ++i) {
    const auto frame = MoebiusTransform::frame(blaschke::testing::random_disk_point(rng, 0.7), angle(rng));
    const auto curve = [&](double s) { return frame(Complex(std::tanh(0.5 * s), 0.0)); };
    const double h = 1e-4;
    const Complex z = curve(0.0);
    const Complex v = (curve(h) - curve(-h)) / (2.0 * h);
    const Complex a = (curve(h) - 2.0 * z + curve(-h)) / (h * h);
    const Complex residual = a + hyperbolic_christoffel(z).contract(v);
    EXPECT_LT(std::abs(residual), 1e-5 * (1.0 + std::abs(a)));
  }
}
