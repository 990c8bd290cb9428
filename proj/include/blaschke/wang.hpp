#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>

#include "blaschke/error.hpp"
#include "blaschke/laplacian.hpp"
#include "blaschke/mesh.hpp"

namespace blaschke {

/// Unique positive root of x^3 - x^2 - 2a (equivalently 2x^3 - 2x^2 - 4a), a >= 0.
/// Bracketed on [1, 1 + (2a)^{1/3}] and refined by safeguarded Newton.
inline double supersolution_root(double a) {
  detail::require(a >= 0.0 && std::isfinite(a), "supersolution_root: argument must be finite and non-negative");
  if (a == 0.0) return 1.0;
  double lo = 1.0, hi = 1.0 + std::cbrt(2.0 * a);
  double x = hi;
  for (int it = 0; it < 200; ++it) {
    const double p = x * x * x - x * x - 2.0 * a;
    if (p > 0.0) hi = x;
    else lo = x;
    const double dp = 3.0 * x * x - 2.0 * x;
    double next = x - p / dp;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 1e-16 * x || hi - lo <= 4e-16 * hi) return next;
    x = next;
  }
  return x;
}

struct WangOptions {
  /// Convergence when sup |Delta_sigma u - RHS| falls below this.
  double tolerance = 1e-10;
  int max_iterations = 200;
};

struct WangSolution {
  ScalarField u;
  int iterations = 0;
  /// sup-norm of Delta_sigma u - (2 e^u - 4 t e^{-2u} |q|^2_sigma - 2).
  double residual = 0.0;
};

namespace detail {

/// F(u) = A u + M (2 e^u - 4 t s e^{-2u} - 2); Wang's equation is F = 0.
inline ScalarField wang_function(const LaplaceOperator& op, const ScalarField& s, double t, const ScalarField& u) {
  const ScalarField eu = u.array().exp();
  const ScalarField e2 = (-2.0 * u.array()).exp();
  return op.stiffness * u + (op.mass.array() * (2.0 * eu.array() - 4.0 * t * s.array() * e2.array() - 2.0)).matrix();
}

inline double sup_scaled(const ScalarField& f, const ScalarField& mass) {
  return f.cwiseQuotient(mass).cwiseAbs().maxCoeff();
}

}  // namespace detail

/// Delta_sigma u from a direct loop over mesh triangles, without the assembled
/// matrix; a separate code path used to certify solutions.
inline ScalarField laplacian_direct(const ConformalMesh& mesh, const ScalarField& u) {
  ScalarField acc = ScalarField::Zero(mesh.class_count());
  for (const auto& tri : mesh.triangles) {
    for (int k = 0; k < 3; ++k) {
      const int i = tri[(k + 1) % 3], j = tri[(k + 2) % 3];
      const Complex e1 = mesh.vertices[static_cast<std::size_t>(i)] - mesh.vertices[static_cast<std::size_t>(tri[k])];
      const Complex e2 = mesh.vertices[static_cast<std::size_t>(j)] - mesh.vertices[static_cast<std::size_t>(tri[k])];
      const double cot = (e1.real() * e2.real() + e1.imag() * e2.imag()) /
                         (e1.real() * e2.imag() - e1.imag() * e2.real());
      const int ci = mesh.vertex_class[static_cast<std::size_t>(i)];
      const int cj = mesh.vertex_class[static_cast<std::size_t>(j)];
      const double flux = 0.5 * cot * (u[cj] - u[ci]);
      acc[ci] += flux;
      acc[cj] -= flux;
    }
  }
  return acc.cwiseQuotient(mesh.mass);
}

/// Independently assembled residual sup |Delta_sigma u - RHS|.
inline double wang_residual_certificate(const ConformalMesh& mesh, const ScalarField& norm2, double t,
                                        const ScalarField& u) {
  const ScalarField lap = laplacian_direct(mesh, u);
  double worst = 0.0;
  for (int c = 0; c < mesh.class_count(); ++c) {
    const double rhs = 2.0 * std::exp(u[c]) - 4.0 * t * std::exp(-2.0 * u[c]) * norm2[c] - 2.0;
    worst = std::max(worst, std::abs(lap[c] - rhs));
  }
  return worst;
}

/// Newton's method with Armijo backtracking for
///   Delta_sigma u = 2 e^u - 4 t e^{-2u} |q|^2_sigma - 2.
/// The Jacobian A + M diag(2 e^u + 8 t s e^{-2u}) is symmetric positive definite.
inline WangSolution solve_wang(const LaplaceOperator& op, const ScalarField& norm2, double t,
                               const ScalarField& u_init, const WangOptions& options = {}) {
  detail::require(t >= 0.0 && std::isfinite(t), "solve_wang: t must be finite and non-negative");
  detail::require(norm2.size() == op.size() && u_init.size() == op.size(), "solve_wang: field size mismatch");
  WangSolution sol{u_init, 0, 0.0};
  ScalarField f = detail::wang_function(op, norm2, t, sol.u);
  const auto merit = [&](const ScalarField& g) { return 0.5 * g.cwiseAbs2().cwiseQuotient(op.mass).sum(); };
  double phi = merit(f);
  sol.residual = detail::sup_scaled(f, op.mass);

  Eigen::SimplicialLDLT<SparseMatrix> ldlt;
  SparseMatrix jac = op.stiffness;
  // The diagonal must be structurally present for in-place updates.
  for (Eigen::Index i = 0; i < op.size(); ++i) jac.coeffRef(i, i) += 0.0;
  jac.makeCompressed();
  ldlt.analyzePattern(jac);

  while (sol.residual >= options.tolerance) {
    if (sol.iterations >= options.max_iterations)
      throw NumericalError("solve_wang: no convergence at t = " + std::to_string(t) + " (residual " +
                           std::to_string(sol.residual) + ")");
    ++sol.iterations;
    jac = op.stiffness;
    for (Eigen::Index i = 0; i < op.size(); ++i)
      jac.coeffRef(i, i) += op.mass[i] * (2.0 * std::exp(sol.u[i]) + 8.0 * t * norm2[i] * std::exp(-2.0 * sol.u[i]));
    ldlt.factorize(jac);
    if (ldlt.info() != Eigen::Success) throw NumericalError("solve_wang: Jacobian factorization failed");
    const ScalarField step = ldlt.solve(-f);

    double alpha = 1.0;
    for (int k = 0;; ++k) {
      const ScalarField trial = sol.u + alpha * step;
      const ScalarField ftrial = detail::wang_function(op, norm2, t, trial);
      const double phi_trial = merit(ftrial);
      if (std::isfinite(phi_trial) && phi_trial <= (1.0 - 2e-4 * alpha) * phi) {
        sol.u = trial;
        f = ftrial;
        phi = phi_trial;
        break;
      }
      if (k >= 40) {
        // Backtracking exhausted: at roundoff level the merit stalls.
        if (sol.residual < 100.0 * options.tolerance) return sol;
        throw NumericalError("solve_wang: line search failed at t = " + std::to_string(t));
      }
      alpha *= 0.5;
    }
    sol.residual = detail::sup_scaled(f, op.mass);
  }
  return sol;
}

/// d u_t / dt from (A + M diag(2 e^u + 8 t s e^{-2u})) udot = 4 M s e^{-2u}.
inline ScalarField solve_udot(const LaplaceOperator& op, const ScalarField& norm2, double t, const ScalarField& u) {
  SparseMatrix jac = op.stiffness;
  for (Eigen::Index i = 0; i < op.size(); ++i)
    jac.coeffRef(i, i) += op.mass[i] * (2.0 * std::exp(u[i]) + 8.0 * t * norm2[i] * std::exp(-2.0 * u[i]));
  Eigen::SimplicialLDLT<SparseMatrix> ldlt(jac);
  if (ldlt.info() != Eigen::Success) throw NumericalError("solve_udot: singular system (mesh defect?)");
  const ScalarField rhs = 4.0 * (op.mass.array() * norm2.array() * (-2.0 * u.array()).exp()).matrix();
  return ldlt.solve(rhs);
}

/// The t = 0 derivative w = (-Delta_sigma + 2)^{-1} (4 |q|^2_sigma), solved by
/// conjugate gradients on (A + 2M) w = 4 M s; independent of the Newton path.
inline ScalarField solve_hyperbolic_derivative(const LaplaceOperator& op, const ScalarField& norm2) {
  SparseMatrix sys = op.stiffness;
  for (Eigen::Index i = 0; i < op.size(); ++i) sys.coeffRef(i, i) += 2.0 * op.mass[i];
  Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper> cg;
  cg.setTolerance(1e-14);
  cg.setMaxIterations(20 * static_cast<int>(op.size()));
  cg.compute(sys);
  const ScalarField rhs = 4.0 * op.mass.cwiseProduct(norm2);
  ScalarField w = cg.solve(rhs);
  if (cg.info() != Eigen::Success) throw NumericalError("solve_hyperbolic_derivative: CG did not converge");
  return w;
}

struct SweepPoint {
  double t = 0.0;
  ScalarField u;
  ScalarField udot;
  int iterations = 0;
  double residual = 0.0;
  double certificate = 0.0;
  double area = 0.0;
  double u_min = 0.0;
  double u_max = 0.0;
  /// log R(max t |q|^2_sigma).
  double envelope = 0.0;
  /// Integral of K(g_t) dv_{g_t}.
  double total_curvature = 0.0;
  /// max 2 t |q|^2_{g_t}; curvature is negative iff this is below 1.
  double max_curvature_term = 0.0;
};

struct FamilySweep {
  std::vector<SweepPoint> points;
};

/// Continuation along an increasing t grid. Each solve starts from the previous
/// solution shifted by the large-t scaling u ~ log(t) / 3, clamped into the envelope.
inline FamilySweep sweep_family(const ConformalMesh& mesh, const LaplaceOperator& op, const ScalarField& norm2,
                                const std::vector<double>& t_grid, const WangOptions& options = {}) {
  detail::require(!t_grid.empty(), "sweep_family: empty t grid");
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    detail::require(t_grid[i] >= 0.0 && std::isfinite(t_grid[i]), "sweep_family: t values must be finite and >= 0");
    if (i > 0) detail::require(t_grid[i] > t_grid[i - 1], "sweep_family: t grid must be strictly increasing");
  }
  FamilySweep sweep;
  ScalarField u = ScalarField::Zero(op.size());
  double t_prev = 0.0;
  const double s_max = norm2.maxCoeff();
  for (double t : t_grid) {
    SweepPoint p;
    p.t = t;
    p.envelope = std::log(supersolution_root(t * s_max));
    ScalarField guess = u;
    if (t_prev > 0.0) guess.array() += std::log(t / t_prev) / 3.0;
    guess = guess.cwiseMax(0.0).cwiseMin(p.envelope);
    WangSolution sol;
    try {
      sol = solve_wang(op, norm2, t, guess, options);
    } catch (const NumericalError& e) {
      throw NumericalError(std::string("sweep_family: ") + e.what());
    }
    p.u = sol.u;
    p.iterations = sol.iterations;
    p.residual = sol.residual;
    p.certificate = wang_residual_certificate(mesh, norm2, t, sol.u);
    p.udot = solve_udot(op, norm2, t, sol.u);
    const ScalarField eu = sol.u.array().exp();
    const ScalarField e2 = (-2.0 * sol.u.array()).exp();
    p.area = mesh.mass.dot(eu);
    p.u_min = sol.u.minCoeff();
    p.u_max = sol.u.maxCoeff();
    // K(g) dv_g = (-1 + 2 t e^{-3u} s) e^u dv_sigma.
    p.total_curvature = mesh.mass.dot((-eu.array() + 2.0 * t * norm2.array() * e2.array()).matrix());
    p.max_curvature_term = (2.0 * t * norm2.array() * (-3.0 * sol.u.array()).exp()).maxCoeff();
    sweep.points.push_back(std::move(p));
    u = sol.u;
    t_prev = t;
  }
  return sweep;
}

/// n points log-spaced on [start, stop], optionally preceded by t = 0.
inline std::vector<double> log_grid(double start, double stop, int count, bool include_zero) {
  detail::require(start > 0.0 && stop > start && count >= 2, "log_grid: need 0 < start < stop and count >= 2");
  std::vector<double> grid;
  if (include_zero) grid.push_back(0.0);
  const double a = std::log10(start), b = std::log10(stop);
  for (int i = 0; i < count; ++i) grid.push_back(std::pow(10.0, a + (b - a) * i / (count - 1)));
  grid.back() = stop;
  grid[include_zero ? 1 : 0] = start;
  return grid;
}

struct FlatLimitRow {
  double t = 0.0;
  double sup_error = 0.0;
  int vertices_used = 0;
};

/// Vertex classes farther than `radius` (hyperbolic) from every listed zero and
/// its images near the octagon. Words of length <= 4 reach every corner of the
/// single vertex cycle.
inline std::vector<int> zero_free_classes(const ConformalMesh& mesh, const FuchsianGroup& group,
                                          const std::vector<Complex>& zeros, double radius) {
  const auto near_words = enumerate_words(group, 4);
  std::vector<Complex> images;
  for (Complex z : zeros)
    for (const auto& g : near_words.elements) {
      const Complex w = g(z);
      if (2.0 * std::atanh(std::abs(w)) < group.hyperbolic_circumradius + radius + 1e-9) images.push_back(w);
    }
  std::vector<char> near(static_cast<std::size_t>(mesh.class_count()), 0);
  // Every raw copy of a class counts: boundary classes have several.
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v)
    for (Complex z : images)
      if (hyperbolic_distance(mesh.vertices[v], z) < radius) {
        near[static_cast<std::size_t>(mesh.vertex_class[v])] = 1;
        break;
      }
  std::vector<int> keep;
  for (int c = 0; c < mesh.class_count(); ++c)
    if (!near[static_cast<std::size_t>(c)]) keep.push_back(c);
  return keep;
}

/// Relative sup-error of t^{-1/3} e^{u_t} rho against 2^{1/3} |f|^{2/3} over the given classes.
inline std::vector<FlatLimitRow> flat_limit_report(const ConformalMesh& mesh, const FamilySweep& sweep,
                                                   const std::vector<Complex>& f_values,
                                                   const std::vector<int>& classes) {
  if (classes.empty()) throw ConfigError("flat_limit_report: exclusion removed every vertex");
  std::vector<FlatLimitRow> rows;
  for (const auto& p : sweep.points) {
    if (p.t <= 0.0) continue;
    FlatLimitRow row{p.t, 0.0, static_cast<int>(classes.size())};
    for (int c : classes) {
      const double rho = mesh.rho[static_cast<std::size_t>(mesh.class_representative[static_cast<std::size_t>(c)])];
      const double target = std::cbrt(2.0) * std::pow(std::abs(f_values[static_cast<std::size_t>(c)]), 2.0 / 3.0);
      const double value = std::pow(p.t, -1.0 / 3.0) * std::exp(p.u[c]) * rho;
      row.sup_error = std::max(row.sup_error, std::abs(value - target) / target);
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace blaschke
