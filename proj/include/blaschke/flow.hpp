#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <numbers>
#include <random>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "blaschke/error.hpp"
#include "blaschke/fuchsian.hpp"
#include "blaschke/laplacian.hpp"
#include "blaschke/mesh.hpp"

namespace blaschke {

/// Unit tangent vector of the surface, represented in the fundamental
/// octagon. `angle` is the Euclidean direction of the velocity in the disk.
/// `word` records the accumulated reduction: the lift of the orbit point is
/// word(point) with direction angle + arg word'(point).
struct TangentState {
  Complex point;
  double angle = 0.0;
  MoebiusTransform word = MoebiusTransform::identity();

  /// Unit-speed velocity in disk coordinates.
  [[nodiscard]] Complex velocity() const { return std::polar(0.5 * (1.0 - std::norm(point)), angle); }

  [[nodiscard]] Complex lift() const { return word(point); }
  [[nodiscard]] double lift_angle() const { return angle + std::arg(word.derivative(point)); }
};

namespace detail {

inline double wrap_angle(double a) {
  a = std::remainder(a, 2.0 * std::numbers::pi);
  return a;
}

}  // namespace detail

/// Reduces a disk tangent vector into the octagon, carrying the direction
/// through the derivative of the reducing isometry.
inline TangentState reduce_state(const FuchsianGroup& group, Complex z, double angle,
                                 const MoebiusTransform& word = MoebiusTransform::identity()) {
  const Reduction red = reduce_to_domain(group, z);
  const MoebiusTransform back = red.word.inverse();
  return {red.point, detail::wrap_angle(angle + std::arg(back.derivative(z))), word * red.word};
}

/// Exact geodesic advance: conjugate the tangent vector to the origin along
/// the positive real axis, move to tanh(dt/2), map back, reduce.
inline TangentState flow_step(const FuchsianGroup& group, const TangentState& state, double dt) {
  if (dt == 0.0) return state;
  const MoebiusTransform frame = MoebiusTransform::frame(state.point, state.angle);
  const double r = std::tanh(0.5 * dt);
  return reduce_state(group, frame(Complex(r, 0.0)), std::arg(frame.derivative(Complex(r, 0.0))), state.word);
}

/// Uniform sample of the normalized Liouville measure: base point uniform in
/// hyperbolic area on the octagon, direction uniform. The octagon is cut into
/// 16 congruent right triangles at the origin; inside one, the polar angle phi
/// has CDF proportional to asin(sin(phi) cosh(d)) - phi and cosh(r) is uniform
/// between 1 and its value on the side.
inline TangentState sample_liouville(const FuchsianGroup& group, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int sector = static_cast<int>(std::uniform_int_distribution<int>(0, 15)(rng));
  const double u = unit(rng), v = unit(rng), w = unit(rng);
  const double cd = std::cosh(group.side_distance);
  const double a2 = std::pow(std::tanh(group.side_distance), 2);
  const double half = std::numbers::pi / 8.0;
  const auto cdf = [&](double phi) { return std::asin(std::min(1.0, std::sin(phi) * cd)) - phi; };
  const double target = u * cdf(half);
  double lo = 0.0, hi = half;
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    (cdf(mid) < target ? lo : hi) = mid;
  }
  const double phi = 0.5 * (lo + hi);
  const double c = std::cos(phi);
  const double cosh_max = c / std::sqrt(std::max(c * c - a2, 1e-300));
  const double cosh_r = 1.0 + v * (cosh_max - 1.0);
  const double radius = std::sqrt((cosh_r - 1.0) / (cosh_r + 1.0));
  const int side = sector / 2;
  const double theta = side * std::numbers::pi / 4.0 + (sector % 2 == 0 ? phi : -phi);
  return reduce_state(group, std::polar(radius, theta), 2.0 * std::numbers::pi * w);
}

/// Integral of f along the orbit over [0, T] by composite Simpson with step
/// at most dt.
inline double birkhoff_integral(const FuchsianGroup& group, const std::function<double(const TangentState&)>& f,
                                const TangentState& start, double horizon, double dt) {
  detail::require(horizon > 0.0, "birkhoff_integral: T must be positive");
  detail::require(dt > 0.0 && dt <= 0.05, "birkhoff_integral: step must lie in (0, 0.05]");
  int n = static_cast<int>(std::ceil(horizon / dt - 1e-9));
  if (n % 2 == 1) ++n;
  const double h = horizon / n;
  TangentState s = start;
  double sum = f(s);
  for (int i = 1; i <= n; ++i) {
    s = flow_step(group, s, h);
    sum += (i == n ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0)) * f(s);
  }
  return sum * h / 3.0;
}

/// Base-function version, with the field interpolated piecewise linearly.
inline double birkhoff_integral(const ConformalMesh& mesh, const FuchsianGroup& group, const ScalarField& field,
                                const TangentState& start, double horizon, double dt) {
  return birkhoff_integral(
      group, [&](const TangentState& s) { return mesh.interpolate(field, s.point); }, start, horizon, dt);
}

struct McOptions {
  double horizon = 50.0;
  int samples = 2000;
  double step = 0.02;
  std::uint64_t seed = 1;
  /// 0 selects the hardware concurrency.
  int threads = 0;
};

struct VarianceEstimate {
  double estimate = 0.0;
  double standard_error = 0.0;
  /// Mean of the field against dv_sigma / Area.
  double field_mean = 0.0;
};

/// Per-sample generator derived from the master seed and the sample index.
inline std::mt19937_64 sample_rng(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

/// Monte-Carlo estimate of the flow variance lim (1/T) E[(int_0^T f o phi_t)^2]
/// for several mean-zero base fields along shared orbits. Deterministic for a
/// fixed seed regardless of thread count.
inline std::vector<VarianceEstimate> variance_mc(const ConformalMesh& mesh, const FuchsianGroup& group,
                                                 const std::vector<ScalarField>& fields, const McOptions& options) {
  detail::require(options.horizon > 0.0 && options.samples >= 2, "variance_mc: need T > 0 and at least 2 samples");
  detail::require(options.step > 0.0 && options.step <= 0.05, "variance_mc: step must lie in (0, 0.05]");
  const double area = mesh.mass.sum();
  std::vector<VarianceEstimate> out(fields.size());
  for (std::size_t j = 0; j < fields.size(); ++j) {
    detail::require(fields[j].size() == mesh.class_count(), "variance_mc: field size does not match the mesh");
    out[j].field_mean = mesh.mass.dot(fields[j]) / area;
    if (std::abs(out[j].field_mean) > 1e-6)
      throw ConfigError("variance_mc: field mean " + std::to_string(out[j].field_mean) +
                        " exceeds 1e-6; subtract the mean first");
  }
  const std::size_t nf = fields.size();
  const auto n = static_cast<std::size_t>(options.samples);
  std::vector<double> values(n * nf, 0.0);
  const auto work = [&](std::size_t begin, std::size_t end) {
    int steps = static_cast<int>(std::ceil(options.horizon / options.step - 1e-9));
    if (steps % 2 == 1) ++steps;
    const double h = options.horizon / steps;
    std::vector<double> acc(nf);
    for (std::size_t i = begin; i < end; ++i) {
      auto rng = sample_rng(options.seed, i);
      TangentState s = sample_liouville(group, rng);
      std::fill(acc.begin(), acc.end(), 0.0);
      for (int k = 0; k <= steps; ++k) {
        if (k > 0) s = flow_step(group, s, h);
        const auto bc = mesh.locate(s.point);
        if (bc.triangle < 0) throw NumericalError("variance_mc: orbit point outside the mesh (reduction failure)");
        const auto& tri = mesh.triangles[bc.triangle];
        const double weight = (k == 0 || k == steps) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
        for (std::size_t j = 0; j < nf; ++j) {
          const auto& f = fields[j];
          acc[j] += weight * (bc.weights[0] * f[mesh.vertex_class[tri[0]]] + bc.weights[1] * f[mesh.vertex_class[tri[1]]] +
                              bc.weights[2] * f[mesh.vertex_class[tri[2]]]);
        }
      }
      for (std::size_t j = 0; j < nf; ++j) {
        const double integral = acc[j] * h / 3.0;
        values[i * nf + j] = integral * integral / options.horizon;
      }
    }
  };
  int threads = options.threads > 0 ? options.threads : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::clamp(threads, 1, 64);
  if (threads == 1) {
    work(0, n);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) {
      const std::size_t begin = n * t / threads, end = n * (t + 1) / threads;
      pool.emplace_back([&, t, begin, end] {
        try {
          work(begin, end);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }
  for (std::size_t j = 0; j < nf; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += values[i * nf + j];
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) var += std::pow(values[i * nf + j] - mean, 2);
    var /= static_cast<double>(n - 1);
    out[j].estimate = mean;
    out[j].standard_error = std::sqrt(var / static_cast<double>(n));
  }
  return out;
}

inline VarianceEstimate variance_mc(const ConformalMesh& mesh, const FuchsianGroup& group, const ScalarField& field,
                                    const McOptions& options) {
  return variance_mc(mesh, group, std::vector<ScalarField>{field}, options).front();
}

/// Gamma-invariant smooth reconstruction of a class field by moving least
/// squares: at z, a linear fit in the normal coordinates 2 (w - z)/(1 - conj(z) w)
/// over every lift of every class point within hyperbolic distance R, with
/// weights (1 - (d/R)^2)^4. The fit constant is invariant under the rotation
/// ambiguity of the normal coordinates, so the field is Gamma-invariant and C^3.
class SmoothField {
public:
  SmoothField(const ConformalMesh& mesh, const FuchsianGroup& group, const WordTable& words, const ScalarField& f,
              double radius)
      : radius_(radius), tanh_half_(std::tanh(0.5 * radius)) {
    detail::require(radius > 0.0, "SmoothField: radius must be positive");
    detail::require(f.size() == mesh.class_count(), "SmoothField: field size does not match the mesh");
    detail::require(words.level_offsets.size() >= 6, "SmoothField: word table must reach length 4");
    const double keep = group.hyperbolic_circumradius + radius + 0.1;
    const double keep_euclid = std::tanh(0.5 * keep);
    const std::size_t end = words.level_offsets[5];
    for (std::size_t e = 0; e < end; ++e) {
      const auto& g = words.elements[e];
      if (hyperbolic_distance(Complex(0.0, 0.0), g(Complex(0.0, 0.0))) > 2.0 * group.hyperbolic_circumradius + keep)
        continue;
      for (int c = 0; c < mesh.class_count(); ++c) {
        const Complex p = g(mesh.class_point(c));
        if (std::abs(p) < keep_euclid) {
          points_.push_back(p);
          values_.push_back(f[c]);
        }
      }
    }
    buckets_.assign(static_cast<std::size_t>(kCells) * kCells, {});
    for (std::size_t i = 0; i < points_.size(); ++i)
      buckets_[cell(points_[i].real()) * kCells + cell(points_[i].imag())].push_back(static_cast<int>(i));
  }

  [[nodiscard]] double value(Complex z) const {
    const double s = 1.0 - std::norm(z);
    const double reach = tanh_half_ * s / (1.0 - tanh_half_ * std::abs(z)) + 1e-12;
    Eigen::Matrix3d normal = Eigen::Matrix3d::Zero();
    Eigen::Vector3d rhs = Eigen::Vector3d::Zero();
    int used = 0;
    const int i0 = cell(z.real() - reach), i1 = cell(z.real() + reach);
    const int j0 = cell(z.imag() - reach), j1 = cell(z.imag() + reach);
    for (int i = i0; i <= i1; ++i)
      for (int j = j0; j <= j1; ++j)
        for (int idx : buckets_[static_cast<std::size_t>(i) * kCells + j]) {
          const Complex xi = (points_[idx] - z) / (1.0 - std::conj(z) * points_[idx]);
          const double r = std::abs(xi);
          if (r >= tanh_half_) continue;
          const double d = 2.0 * std::atanh(r) / radius_;
          const double w = std::pow(1.0 - d * d, 4);
          const Eigen::Vector3d b(1.0, 2.0 * xi.real(), 2.0 * xi.imag());
          normal += w * b * b.transpose();
          rhs += w * values_[idx] * b;
          ++used;
        }
    if (used < 3) throw NumericalError("SmoothField: fewer than 3 points within the reconstruction radius");
    return normal.ldlt().solve(rhs)[0];
  }

  /// Euclidean first and second partials by central differences with a
  /// hyperbolic step of 2e-4.
  struct Jet {
    double fx = 0.0, fy = 0.0;
    double fxx = 0.0, fxy = 0.0, fyy = 0.0;
  };

  [[nodiscard]] Jet jet(Complex z) const {
    const double e = 1e-4 * (1.0 - std::norm(z));
    const double c = value(z);
    const double xp = value(z + Complex(e, 0.0)), xm = value(z - Complex(e, 0.0));
    const double yp = value(z + Complex(0.0, e)), ym = value(z - Complex(0.0, e));
    const double pp = value(z + Complex(e, e)), pm = value(z + Complex(e, -e));
    const double mp = value(z + Complex(-e, e)), mm = value(z + Complex(-e, -e));
    Jet out;
    out.fx = (xp - xm) / (2.0 * e);
    out.fy = (yp - ym) / (2.0 * e);
    out.fxx = (xp - 2.0 * c + xm) / (e * e);
    out.fyy = (yp - 2.0 * c + ym) / (e * e);
    out.fxy = (pp - pm - mp + mm) / (4.0 * e * e);
    return out;
  }

  [[nodiscard]] std::size_t lift_count() const { return points_.size(); }

private:
  static constexpr int kCells = 160;
  [[nodiscard]] static int cell(double x) {
    return std::clamp(static_cast<int>(std::floor((x + 1.0) * 0.5 * kCells)), 0, kCells - 1);
  }

  double radius_;
  double tanh_half_;
  std::vector<Complex> points_;
  std::vector<double> values_;
  std::vector<std::vector<int>> buckets_;
};

/// A real 1-form chi = chi_x dx + chi_y dy with its first partials
/// d_i chi_j (i = derivative direction) at one point.
struct CovectorJet {
  double cx = 0.0, cy = 0.0;
  double dx_cx = 0.0, dy_cx = 0.0, dx_cy = 0.0, dy_cy = 0.0;
};

using OneFormField = std::function<CovectorJet(Complex)>;

/// chi = dF for the reconstruction F of a class field.
inline OneFormField exact_form(std::shared_ptr<const SmoothField> f) {
  return [f](Complex z) {
    const auto j = f->jet(z);
    return CovectorJet{j.fx, j.fy, j.fxx, j.fxy, j.fxy, j.fyy};
  };
}

/// (D chi)(v, v) = v^i v^j (d_i chi_j - Gamma^k_ij chi_k), with the analytic
/// Christoffel symbols of the hyperbolic metric.
inline double symmetric_derivative(const CovectorJet& chi, Complex z, Complex v) {
  const double vx = v.real(), vy = v.imag();
  const double grad = vx * (vx * chi.dx_cx + vy * chi.dx_cy) + vy * (vx * chi.dy_cx + vy * chi.dy_cy);
  const Complex gamma = hyperbolic_christoffel(z).contract(v);
  return grad - (gamma.real() * chi.cx + gamma.imag() * chi.cy);
}

/// sup over class points of the hyperbolic norm |chi|_sigma = |(chi_x, chi_y)| (1 - |z|^2) / 2.
inline double sup_norm(const ConformalMesh& mesh, const OneFormField& chi) {
  double out = 0.0;
  for (int c = 0; c < mesh.class_count(); ++c) {
    const Complex z = mesh.class_point(c);
    const auto j = chi(z);
    out = std::max(out, std::hypot(j.cx, j.cy) * 0.5 * (1.0 - std::norm(z)));
  }
  return out;
}

/// Integral of integrand(state) over one period of the closed geodesic of a
/// hyperbolic element, by the periodic trapezoid rule with n points.
inline double closed_geodesic_integral(const FuchsianGroup& group, const MoebiusTransform& gamma, int n_points,
                                       const std::function<double(const TangentState&)>& integrand) {
  detail::require(n_points >= 8, "closed_geodesic_integral: need at least 8 quadrature points");
  const AxisData axis = axis_data(gamma);
  // Closest point of the axis to the origin; the tangent there is parallel
  // to the chord between the fixed points.
  const Complex p = axis.repelling, q = axis.attracting;
  const Complex z0 = (p + q) / (2.0 + std::abs(q - p));
  const MoebiusTransform frame = MoebiusTransform::frame(z0, std::arg(q - p));
  const double length = axis.translation_length;
  double sum = 0.0;
  for (int j = 0; j < n_points; ++j) {
    const Complex x(std::tanh(0.5 * length * j / n_points), 0.0);
    sum += integrand(reduce_state(group, frame(x), std::arg(frame.derivative(x))));
  }
  return sum * length / n_points;
}

/// |I_2(D chi)| along the closed geodesic of gamma.
inline double xray_check(const FuchsianGroup& group, const OneFormField& chi, const MoebiusTransform& gamma,
                         int n_points) {
  return std::abs(closed_geodesic_integral(group, gamma, n_points, [&](const TangentState& s) {
    return symmetric_derivative(chi(s.point), s.point, s.velocity());
  }));
}

}  // namespace blaschke
