#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "blaschke/error.hpp"
#include "blaschke/gamma.hpp"
#include "blaschke/spectral.hpp"
#include "blaschke/wang.hpp"

namespace blaschke {

/// Covariance metric of the Fuchsian point in the fiber direction of q.
struct CovarianceReport {
  double variance = 0.0;
  double mean = 0.0;
  double total = 0.0;
  int k = 0;
  /// max(Parseval bound on the modes beyond k, contribution of the last tenth of the modes).
  double tail = 0.0;
  bool truncation_warning = false;
  /// ||q||^2_sigma.
  double q_norm2 = 0.0;
  /// ||w - mean(w)||^2 - sum_j <w, phi_j>^2, the unresolved part of w.
  double parseval_gap = 0.0;
  /// Per-mode variance contributions 4 ratio(lambda_j) <w, phi_j>^2 / Area, j = 1..k.
  std::vector<double> contributions;
};

/// G(q, q) from w = (-Delta_sigma + 2)^{-1}(4 |q|^2_sigma):
///   variance = sum_{j=1..k} 4 gamma_ratio(lambda_j) <w, phi_j>^2 / Area,
///   mean = (||q||^2_sigma)^2 / (pi^2 chi^2), chi = -2.
inline CovarianceReport fiber_norm(const LaplaceOperator& op, const ScalarField& norm2, const SpectralData& spectral,
                                   int k = -1) {
  if (k < 0) k = spectral.k();
  detail::require(k >= 1 && k <= spectral.k(), "fiber_norm: mode count outside the computed spectrum");
  detail::require(norm2.size() == op.size(), "fiber_norm: field size does not match the mesh");
  CovarianceReport r;
  r.k = k;
  r.q_norm2 = op.mass.dot(norm2);
  r.contributions.assign(static_cast<std::size_t>(k), 0.0);
  if (norm2.cwiseAbs().maxCoeff() == 0.0) return r;

  const double area = op.mass.sum();
  const ScalarField w = solve_hyperbolic_derivative(op, norm2);
  const ScalarField mw = op.mass.cwiseProduct(w);
  double captured = 0.0;
  for (int j = 1; j <= k; ++j) {
    const double c = spectral.modes.col(j).dot(mw);
    captured += c * c;
    r.contributions[j - 1] = 4.0 * gamma_ratio(spectral.eigenvalues[j]) * c * c / area;
    r.variance += r.contributions[j - 1];
  }
  const double mean_w = mw.sum() / area;
  const ScalarField centered = w.array() - mean_w;
  r.parseval_gap = std::max(0.0, centered.dot(op.mass.cwiseProduct(centered)) - captured);
  const double parseval = 4.0 * gamma_ratio(spectral.eigenvalues[k]) * r.parseval_gap / area;
  double last = 0.0;
  for (int j = k - std::max(1, k / 10) + 1; j <= k; ++j) last += r.contributions[j - 1];
  r.tail = std::max(parseval, last);
  const double chi = -2.0;
  r.mean = r.q_norm2 * r.q_norm2 / (std::numbers::pi * std::numbers::pi * chi * chi);
  r.total = r.variance + r.mean;
  r.truncation_warning = r.tail > 0.05 * r.variance;
  return r;
}

/// <1, udot_t>_{g_t} / Area(g_t) for each sweep point.
inline std::vector<double> mean_term_along_family(const FamilySweep& sweep, const ScalarField& mass) {
  std::vector<double> out;
  out.reserve(sweep.points.size());
  for (const auto& p : sweep.points) {
    const ScalarField weight = mass.cwiseProduct(ScalarField(p.u.array().exp()));
    out.push_back(weight.dot(p.udot) / weight.sum());
  }
  return out;
}

struct LengthTable {
  std::vector<double> t;
  std::vector<double> mean_term;
  /// L(T) = integral of the mean term from 0 to T.
  std::vector<double> length;
  double slope = 0.0;
  double intercept = 0.0;
  /// RMS deviation of L from the fitted line over the fit window.
  double fit_residual = 0.0;
  /// min of t * mean term over the last decade.
  double decay_floor = 0.0;
  int fit_points = 0;
};

/// Cumulative L(T) and a least-squares fit L ~ c log T + b over the last two
/// decades. The grid must start at 0; the first interval uses the trapezoid
/// in t, later ones the trapezoid in log t of t * mean.
inline LengthTable length_lower_bound(const std::vector<double>& t, const std::vector<double>& mean_term) {
  detail::require(t.size() == mean_term.size() && t.size() >= 3, "length_lower_bound: need matching tables of >= 3 points");
  detail::require(t.front() == 0.0, "length_lower_bound: grid must start at t = 0");
  for (std::size_t i = 1; i < t.size(); ++i)
    detail::require(t[i] > t[i - 1], "length_lower_bound: grid must be strictly increasing");
  if (!(t.back() >= 100.0 * t[1]))
    throw ConfigError("length_lower_bound: insufficient range, the positive grid spans less than 2 decades");

  LengthTable out;
  out.t = t;
  out.mean_term = mean_term;
  out.length.assign(t.size(), 0.0);
  out.length[1] = 0.5 * (mean_term[0] + mean_term[1]) * t[1];
  for (std::size_t i = 2; i < t.size(); ++i) {
    const double dlog = std::log(t[i] / t[i - 1]);
    out.length[i] = out.length[i - 1] + 0.5 * dlog * (t[i] * mean_term[i] + t[i - 1] * mean_term[i - 1]);
  }

  const double fit_start = t.back() / 100.0 * (1.0 - 1e-12);
  const double floor_start = t.back() / 10.0 * (1.0 - 1e-12);
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int n = 0;
  out.decay_floor = 1e300;
  for (std::size_t i = 1; i < t.size(); ++i) {
    if (t[i] >= floor_start) out.decay_floor = std::min(out.decay_floor, t[i] * mean_term[i]);
    if (t[i] < fit_start) continue;
    const double x = std::log(t[i]), y = out.length[i];
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  detail::require(n >= 2, "length_lower_bound: fewer than 2 grid points in the last two decades");
  out.fit_points = n;
  const double det = n * sxx - sx * sx;
  out.slope = (n * sxy - sx * sy) / det;
  out.intercept = (sy - out.slope * sx) / n;
  double ss = 0.0;
  for (std::size_t i = 1; i < t.size(); ++i) {
    if (t[i] < fit_start) continue;
    const double e = out.length[i] - (out.slope * std::log(t[i]) + out.intercept);
    ss += e * e;
  }
  out.fit_residual = std::sqrt(ss / n);
  return out;
}

struct AreaBound {
  /// max over the last decade of (Area(g_t) - 2 pi |chi|) / t^{1/3}.
  double constant = 0.0;
  /// (max - min) / max of the same ratio over the last decade.
  double spread = 0.0;
};

inline AreaBound area_bound(const FamilySweep& sweep) {
  detail::require(!sweep.points.empty() && sweep.points.back().t > 0.0, "area_bound: sweep must reach t > 0");
  const double t_max = sweep.points.back().t;
  double lo = 1e300, hi = -1e300;
  for (const auto& p : sweep.points) {
    if (p.t < t_max / 10.0 * (1.0 - 1e-12)) continue;
    const double d = (p.area - 4.0 * std::numbers::pi) / std::cbrt(p.t);
    lo = std::min(lo, d);
    hi = std::max(hi, d);
  }
  return {hi, hi > 0.0 ? (hi - lo) / hi : 0.0};
}

}  // namespace blaschke
