#pragma once

#include <array>
#include <cmath>
#include <vector>

#include <Eigen/Sparse>

#include "blaschke/mesh.hpp"

namespace blaschke {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Discrete Laplace-Beltrami operator of the hyperbolic metric on a glued mesh:
/// Delta_sigma ~ -M^{-1} A, with A the flat cotangent stiffness (the 2D Dirichlet
/// energy is conformally invariant) and M the lumped hyperbolic mass.
struct LaplaceOperator {
  SparseMatrix stiffness;
  ScalarField mass;

  [[nodiscard]] Eigen::Index size() const { return mass.size(); }

  /// Delta_sigma u.
  [[nodiscard]] ScalarField apply(const ScalarField& u) const {
    return -(stiffness * u).cwiseQuotient(mass);
  }
};

inline LaplaceOperator assemble_laplacian(const ConformalMesh& mesh) {
  const int n = mesh.class_count();
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(mesh.triangles.size() * 9);
  for (const auto& tri : mesh.triangles) {
    std::array<Complex, 3> p{mesh.vertices[tri[0]], mesh.vertices[tri[1]], mesh.vertices[tri[2]]};
    for (int k = 0; k < 3; ++k) {
      // Edge (i, j) opposite to corner k.
      const int i = (k + 1) % 3, j = (k + 2) % 3;
      const Complex u = p[i] - p[k], v = p[j] - p[k];
      const double cross = u.real() * v.imag() - u.imag() * v.real();
      const double dot = u.real() * v.real() + u.imag() * v.imag();
      const double w = 0.5 * dot / cross;
      const int ci = mesh.vertex_class[tri[i]], cj = mesh.vertex_class[tri[j]];
      triplets.emplace_back(ci, cj, -w);
      triplets.emplace_back(cj, ci, -w);
      triplets.emplace_back(ci, ci, w);
      triplets.emplace_back(cj, cj, w);
    }
  }
  LaplaceOperator op;
  op.stiffness.resize(n, n);
  op.stiffness.setFromTriplets(triplets.begin(), triplets.end());
  op.stiffness.makeCompressed();
  op.mass = mesh.mass;
  return op;
}

/// Largest positive off-diagonal stiffness entry; <= 0 means A is an M-matrix
/// and the discrete maximum principle holds.
inline double max_offdiagonal(const SparseMatrix& a) {
  double worst = -1e300;
  for (int col = 0; col < a.outerSize(); ++col)
    for (SparseMatrix::InnerIterator it(a, col); it; ++it)
      if (it.row() != it.col()) worst = std::max(worst, it.value());
  return worst;
}

/// Christoffel symbols of a conformal metric e^{lambda} |dz|^2, encoded by the
/// gradient of lambda: with (lx, ly) = grad lambda / 2,
///   G^x_xx = lx, G^x_xy = ly, G^x_yy = -lx, G^y_xx = -ly, G^y_xy = lx, G^y_yy = ly.
struct ChristoffelSymbols {
  double lx = 0.0;
  double ly = 0.0;

  /// Contraction Gamma^k_ij v^i v^j as a complex number (k = x, y).
  [[nodiscard]] Complex contract(Complex v) const {
    const double vx = v.real(), vy = v.imag();
    const double gx = lx * vx * vx + 2.0 * ly * vx * vy - lx * vy * vy;
    const double gy = -ly * vx * vx + 2.0 * lx * vx * vy + ly * vy * vy;
    return {gx, gy};
  }
};

/// Analytic symbols of the hyperbolic metric rho |dz|^2, lambda = log rho.
inline ChristoffelSymbols hyperbolic_christoffel(Complex z) {
  const double s = 1.0 - std::norm(z);
  return {2.0 * z.real() / s, 2.0 * z.imag() / s};
}

/// Symbols at every raw vertex from a per-raw-vertex log conformal factor,
/// by area-weighted averaging of the piecewise-linear gradient over the
/// vertex star. Vertices on the cut see only their one-sided star.
inline std::vector<ChristoffelSymbols> christoffel(const ConformalMesh& mesh,
                                                   const Eigen::VectorXd& log_factor_raw) {
  const std::size_t nv = mesh.vertices.size();
  std::vector<Complex> grad(nv, Complex(0.0, 0.0));
  std::vector<double> weight(nv, 0.0);
  for (const auto& tri : mesh.triangles) {
    const Complex p0 = mesh.vertices[tri[0]];
    const Complex e1 = mesh.vertices[tri[1]] - p0, e2 = mesh.vertices[tri[2]] - p0;
    const double area2 = e1.real() * e2.imag() - e1.imag() * e2.real();
    const double d1 = log_factor_raw[tri[1]] - log_factor_raw[tri[0]];
    const double d2 = log_factor_raw[tri[2]] - log_factor_raw[tri[0]];
    // Solve [e1; e2] g = [d1; d2].
    const double gx = (d1 * e2.imag() - d2 * e1.imag()) / area2;
    const double gy = (e1.real() * d2 - e2.real() * d1) / area2;
    for (int v : tri) {
      grad[v] += 0.5 * area2 * Complex(gx, gy);
      weight[v] += 0.5 * area2;
    }
  }
  std::vector<ChristoffelSymbols> out(nv);
  for (std::size_t v = 0; v < nv; ++v) {
    const Complex g = grad[v] / weight[v];
    out[v] = {0.5 * g.real(), 0.5 * g.imag()};
  }
  return out;
}

/// log(e^u rho) at raw vertices, for a class field u.
inline Eigen::VectorXd log_conformal_factor(const ConformalMesh& mesh, const ScalarField& u) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(mesh.vertices.size()));
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v)
    out[v] = u[mesh.vertex_class[v]] + std::log(mesh.rho[v]);
  return out;
}

}  // namespace blaschke
