#pragma once

#include <memory>
#include <random>

#include "blaschke/config.hpp"
#include "blaschke/covariance.hpp"
#include "blaschke/cubic_differential.hpp"
#include "blaschke/fuchsian.hpp"
#include "blaschke/laplacian.hpp"
#include "blaschke/mesh.hpp"
#include "blaschke/spectral.hpp"
#include "blaschke/wang.hpp"

namespace blaschke::testing {

/// Coarse shared state so the suite stays fast.
struct Coarse {
  FuchsianGroup group = octagon_group();
  ConformalMesh mesh = build_octagon_mesh(group, 0.2);
  LaplaceOperator op = assemble_laplacian(mesh);
  CubicDifferential q = poincare_series(group, generic_seed(), 5);
  DifferentialSamples samples = sample_differential(q, mesh);

  static const Coarse& get() {
    static const Coarse instance;
    return instance;
  }
};

inline Complex random_disk_point(std::mt19937_64& rng, double radius = 0.9) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return std::polar(radius * std::sqrt(u(rng)), 2.0 * std::numbers::pi * u(rng));
}

inline MoebiusTransform random_isometry(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 2.0 * std::numbers::pi);
  return MoebiusTransform::frame(random_disk_point(rng, 0.8), u(rng));
}

}  // namespace blaschke::testing
