#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include "blaschke/error.hpp"
#include "blaschke/laplacian.hpp"

namespace blaschke {

/// Lowest eigenpairs of A phi = lambda M phi. Columns of `modes` are
/// M-orthonormal; column 0 is the constant mode.
struct SpectralData {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd modes;
  double area = 0.0;
  int basis_size = 0;
  double max_residual = 0.0;
  double orthonormality_defect = 0.0;

  [[nodiscard]] int k() const { return static_cast<int>(eigenvalues.size()) - 1; }
};

struct EigenOptions {
  int block = 12;
  double shift = 1.0;
  double tolerance = 1e-9;
  std::uint64_t seed = 0x5eed;
};

namespace detail {

/// Appends the block `w` to the orthonormal basis (first `used` columns of q)
/// after two passes of block Gram-Schmidt. Deficient directions are replaced
/// by fresh random vectors.
inline int append_block(Eigen::MatrixXd& q, int used, Eigen::MatrixXd w, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  const int b = static_cast<int>(w.cols());
  for (int attempt = 0; attempt < 4; ++attempt) {
    for (int pass = 0; pass < 2; ++pass) {
      if (used > 0) w -= q.leftCols(used) * (q.leftCols(used).transpose() * w);
    }
    // Modified Gram-Schmidt inside the block, with rank check.
    bool deficient = false;
    for (int j = 0; j < b; ++j) {
      const double before = w.col(j).norm();
      for (int i = 0; i < j; ++i) w.col(j) -= w.col(i).dot(w.col(j)) * w.col(i);
      for (int i = 0; i < j; ++i) w.col(j) -= w.col(i).dot(w.col(j)) * w.col(i);
      const double after = w.col(j).norm();
      if (!(after > 1e-10 * std::max(before, 1e-300))) {
        for (Eigen::Index r = 0; r < w.rows(); ++r) w(r, j) = normal(rng);
        deficient = true;
      } else {
        w.col(j) /= after;
      }
    }
    if (!deficient) {
      q.middleCols(used, b) = w;
      return used + b;
    }
  }
  throw NumericalError("eigensolve: could not extend the Krylov basis");
}

}  // namespace detail

/// Lowest k+1 eigenpairs by shift-invert block Lanczos with full
/// reorthogonalization. The symmetric operator is S (A + shift M)^{-1} S with
/// S = M^{1/2}; its largest eigenvalues mu give lambda = 1/mu - shift.
inline SpectralData eigensolve(const LaplaceOperator& op, int k, EigenOptions options = {}) {
  const Eigen::Index n = op.size();
  detail::require(k >= 1, "eigensolve: k must be at least 1");
  detail::require(4 * static_cast<Eigen::Index>(k) < n, "eigensolve: k must be below vertex count / 4");
  detail::require(options.block >= 1 && options.shift > 0.0, "eigensolve: block size and shift must be positive");

  const Eigen::VectorXd s = op.mass.cwiseSqrt();
  SparseMatrix shifted = op.stiffness;
  for (Eigen::Index i = 0; i < n; ++i) shifted.coeffRef(i, i) += options.shift * op.mass[i];
  Eigen::SimplicialLDLT<SparseMatrix> ldlt(shifted);
  if (ldlt.info() != Eigen::Success) throw NumericalError("eigensolve: factorization of A + shift M failed");
  const auto apply = [&](const Eigen::MatrixXd& x) -> Eigen::MatrixXd {
    Eigen::MatrixXd y = s.asDiagonal() * x;
    y = ldlt.solve(y);
    return s.asDiagonal() * y;
  };

  const int b = options.block;
  const int wanted = k + 1;
  // Small k still needs room for slowly separating clusters.
  Eigen::Index cap = std::min<Eigen::Index>(n, std::max<Eigen::Index>(12 * static_cast<Eigen::Index>(wanted) + 4 * b, 20 * b));
  Eigen::Index target = std::min<Eigen::Index>(cap, 3 * wanted + 4 * b);
  Eigen::MatrixXd q(n, cap), z(n, cap);
  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal;

  Eigen::MatrixXd start(n, b);
  start.col(0) = s / s.norm();
  for (int j = 1; j < b; ++j)
    for (Eigen::Index r = 0; r < n; ++r) start(r, j) = normal(rng);
  int used = detail::append_block(q, 0, start, rng);
  z.leftCols(b) = apply(q.leftCols(b));

  SpectralData out;
  while (true) {
    while (used + b <= target) {
      used = detail::append_block(q, used, z.middleCols(used - b, b), rng);
      z.middleCols(used - b, b) = apply(q.middleCols(used - b, b));
    }
    Eigen::MatrixXd h = q.leftCols(used).transpose() * z.leftCols(used);
    h = 0.5 * (h + h.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> small(h);
    if (small.info() != Eigen::Success) throw NumericalError("eigensolve: projected eigenproblem failed");
    // Largest mu are the last columns.
    Eigen::MatrixXd y = q.leftCols(used) * small.eigenvectors().rightCols(wanted).rowwise().reverse();
    out.modes = s.cwiseInverse().asDiagonal() * y;
    out.eigenvalues.resize(wanted);
    out.max_residual = 0.0;
    for (int j = 0; j < wanted; ++j) {
      auto phi = out.modes.col(j);
      const double mnorm = std::sqrt(phi.dot(op.mass.asDiagonal() * phi));
      phi /= mnorm;
      const double lambda = phi.dot(op.stiffness * phi);
      out.eigenvalues[j] = lambda;
      const Eigen::VectorXd r = op.stiffness * phi - lambda * (op.mass.asDiagonal() * phi);
      out.max_residual = std::max(out.max_residual, r.norm());
    }
    out.basis_size = used;
    if (out.max_residual < options.tolerance) break;
    if (target >= cap || used + b > cap)
    {
      char buf[128];
      std::snprintf(buf, sizeof buf, "eigensolve: residual %.3e above tolerance at basis size %d", out.max_residual,
                    used);
      throw NumericalError(buf);
    }
    target = std::min<Eigen::Index>(cap, target + target / 2);
  }

  // Deterministic signs: constant mode positive, others with the largest
  // entry positive.
  for (int j = 0; j < wanted; ++j) {
    auto phi = out.modes.col(j);
    Eigen::Index arg = 0;
    phi.cwiseAbs().maxCoeff(&arg);
    if (phi[arg] < 0.0) phi = -phi;
  }
  out.area = op.mass.sum();
  const Eigen::MatrixXd gram = out.modes.transpose() * op.mass.asDiagonal() * out.modes;
  out.orthonormality_defect = (gram - Eigen::MatrixXd::Identity(wanted, wanted)).cwiseAbs().maxCoeff();
  return out;
}

}  // namespace blaschke
