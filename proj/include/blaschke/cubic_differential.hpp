#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <memory>
#include <string>
#include <vector>

#include "blaschke/error.hpp"
#include "blaschke/fuchsian.hpp"
#include "blaschke/mesh.hpp"

namespace blaschke {

/// Coefficients c0 + c1 z + c2 z^2 of a Poincare series seed.
using SeedPolynomial = std::array<Complex, 3>;

/// Holomorphic cubic differential q = f dz^3 on the octagon surface, given by
/// the truncated weight-6 Poincare series
///   f(z) = sum_{gamma, |word| <= N} P(gamma z) gamma'(z)^3.
/// The element table is shared between copies.
class CubicDifferential {
public:
  CubicDifferential() = default;

  CubicDifferential(SeedPolynomial seed, int truncation, std::shared_ptr<const WordTable> words)
      : seed_(seed), truncation_(truncation), words_(std::move(words)) {
    pack();
  }

  [[nodiscard]] const SeedPolynomial& seed() const { return seed_; }
  [[nodiscard]] int truncation() const { return truncation_; }
  [[nodiscard]] bool is_zero() const {
    return seed_[0] == Complex(0.0) && seed_[1] == Complex(0.0) && seed_[2] == Complex(0.0);
  }
  [[nodiscard]] const std::shared_ptr<const WordTable>& words() const { return words_; }

  /// The differential c q for a complex constant c.
  [[nodiscard]] CubicDifferential scaled(Complex c) const {
    CubicDifferential out = *this;
    for (auto& s : out.seed_) s *= c;
    return out;
  }

  /// f(z).
  [[nodiscard]] Complex operator()(Complex z) const { return sum(z, 0, ar_.size()); }

  /// f'(z).
  [[nodiscard]] Complex derivative(Complex z) const {
    Complex acc(0.0, 0.0);
    if (!words_) return acc;
    for (const auto& g : words_->elements) {
      const Complex inv = 1.0 / (std::conj(g.b()) * z + std::conj(g.a()));
      const Complex gz = g(z), d = inv * inv;
      const Complex p = seed_[0] + gz * (seed_[1] + gz * seed_[2]);
      const Complex dp = seed_[1] + 2.0 * gz * seed_[2];
      // d/dz [P(gz) g'^3] = P'(gz) g'^4 + 3 P(gz) g'^2 g'', with g'' = -2 conj(b) inv^3.
      acc += dp * d * d * d * d + 3.0 * p * d * d * (-2.0 * std::conj(g.b()) * d * inv);
    }
    return acc;
  }

  /// Contribution of the words of maximal length: f_N(z) - f_{N-1}(z).
  [[nodiscard]] Complex last_level(Complex z) const {
    if (!words_ || truncation_ == 0) return (*this)(z);
    return sum(z, words_->level_offsets[static_cast<std::size_t>(truncation_)], ar_.size());
  }

  /// Residual |f(gz) g'(z)^3 - f(z)| / (1 + |f(z)|) for a group element g.
  [[nodiscard]] double automorphy_residual(const MoebiusTransform& g, Complex z) const {
    const Complex fz = (*this)(z);
    const Complex d = g.derivative(z);
    return std::abs((*this)(g(z)) * d * d * d - fz) / (1.0 + std::abs(fz));
  }

private:
  void pack() {
    ar_.clear();
    ai_.clear();
    br_.clear();
    bi_.clear();
    if (!words_) return;
    for (const auto& g : words_->elements) {
      ar_.push_back(g.a().real());
      ai_.push_back(g.a().imag());
      br_.push_back(g.b().real());
      bi_.push_back(g.b().imag());
    }
  }

  // Structure-of-arrays layout with a fixed number of accumulator lanes: the
  // compiler vectorizes the loop while the summation order stays fixed.
  static constexpr std::size_t kLanes = 4;

  [[nodiscard]] Complex sum(Complex z, std::size_t begin, std::size_t end) const {
    const double zr = z.real(), zi = z.imag();
    const double s0r = seed_[0].real(), s0i = seed_[0].imag();
    const double s1r = seed_[1].real(), s1i = seed_[1].imag();
    const double s2r = seed_[2].real(), s2i = seed_[2].imag();
    std::array<double, kLanes> accr{}, acci{};
    const auto term = [&](std::size_t k, double& outr, double& outi) {
      const double ar = ar_[k], ai = ai_[k], br = br_[k], bi = bi_[k];
      // w = conj(b) z + conj(a), inv = 1 / w, g' = inv^2.
      const double wr = br * zr + bi * zi + ar;
      const double wi = br * zi - bi * zr - ai;
      const double den = 1.0 / (wr * wr + wi * wi);
      const double ir = wr * den, ii = -wi * den;
      // gz = (a z + b) inv.
      const double nr = ar * zr - ai * zi + br;
      const double ni = ar * zi + ai * zr + bi;
      const double gr = nr * ir - ni * ii, gi = nr * ii + ni * ir;
      const double g2r = gr * gr - gi * gi, g2i = 2.0 * gr * gi;
      const double pr = s0r + s1r * gr - s1i * gi + s2r * g2r - s2i * g2i;
      const double pi = s0i + s1r * gi + s1i * gr + s2r * g2i + s2i * g2r;
      const double dr = ir * ir - ii * ii, di = 2.0 * ir * ii;
      const double d2r = dr * dr - di * di, d2i = 2.0 * dr * di;
      const double d3r = d2r * dr - d2i * di, d3i = d2r * di + d2i * dr;
      outr += pr * d3r - pi * d3i;
      outi += pr * d3i + pi * d3r;
    };
    std::size_t k = begin;
    for (; k + kLanes <= end; k += kLanes)
      for (std::size_t l = 0; l < kLanes; ++l) term(k + l, accr[l], acci[l]);
    for (std::size_t l = 0; k < end; ++k, ++l) term(k, accr[l], acci[l]);
    double r = 0.0, i = 0.0;
    for (std::size_t l = 0; l < kLanes; ++l) {
      r += accr[l];
      i += acci[l];
    }
    return {r, i};
  }

  SeedPolynomial seed_{};
  int truncation_ = 0;
  std::shared_ptr<const WordTable> words_;
  std::vector<double> ar_, ai_, br_, bi_;
};

namespace detail {

/// Probe points used to decide whether a series vanished: a polar grid over the octagon.
inline std::vector<Complex> octagon_probe_points(const FuchsianGroup& group) {
  std::vector<Complex> out;
  for (int i = 1; i <= 6; ++i)
    for (int j = 0; j < 16; ++j) {
      const double theta = (j + 0.37) * std::numbers::pi / 8.0;
      out.push_back(std::polar(0.95 * group.circumradius * i / 6.0 * std::cos(std::numbers::pi / 8.0), theta));
    }
  return out;
}

}  // namespace detail

/// Largest |f| over a fixed probe grid in the octagon.
inline double probe_max_modulus(const CubicDifferential& q, const FuchsianGroup& group) {
  double m = 0.0;
  for (Complex z : detail::octagon_probe_points(group)) m = std::max(m, std::abs(q(z)));
  return m;
}

/// Truncated Poincare series for one seed. A nonzero seed whose series vanishes
/// is rejected.
inline CubicDifferential poincare_series(const FuchsianGroup& group, const SeedPolynomial& seed, int truncation,
                                         std::shared_ptr<const WordTable> words = nullptr) {
  detail::require(truncation >= 1, "poincare_series: truncation word length must be at least 1");
  if (!words || static_cast<int>(words->level_offsets.size()) < truncation + 2) {
    words = std::make_shared<const WordTable>(enumerate_words(group, truncation));
  } else if (static_cast<int>(words->level_offsets.size()) > truncation + 2) {
    auto trimmed = std::make_shared<WordTable>();
    const std::size_t end = words->level_offsets[static_cast<std::size_t>(truncation) + 1];
    trimmed->elements.assign(words->elements.begin(), words->elements.begin() + static_cast<long>(end));
    trimmed->level_offsets.assign(words->level_offsets.begin(), words->level_offsets.begin() + truncation + 2);
    words = trimmed;
  }
  CubicDifferential q(seed, truncation, std::move(words));
  if (q.is_zero()) return q;
  if (probe_max_modulus(q, group) < 1e-14)
    throw NumericalError("poincare_series: seed annihilated by the group symmetry (max |f| < 1e-14)");
  return q;
}

/// Tries the seeds 1, z, z^2 in order and keeps the first whose series does not vanish.
inline CubicDifferential poincare_series_auto(const FuchsianGroup& group, int truncation) {
  detail::require(truncation >= 1, "poincare_series: truncation word length must be at least 1");
  auto words = std::make_shared<const WordTable>(enumerate_words(group, truncation));
  for (int k = 0; k < 3; ++k) {
    SeedPolynomial seed{};
    seed[static_cast<std::size_t>(k)] = 1.0;
    CubicDifferential q(seed, truncation, words);
    if (probe_max_modulus(q, group) >= 1e-14) return q;
  }
  throw NumericalError("poincare_series: all monomial seeds annihilated by the group symmetry");
}

/// |q|^2_sigma = |f|^2 / rho^3 for the hyperbolic metric.
inline double pointwise_norm(const CubicDifferential& q, Complex z) {
  detail::require(std::abs(z) < 1.0, "pointwise_norm: point must lie in the open unit disk");
  const double r = conformal_factor(z);
  return std::norm(q(z)) / (r * r * r);
}

/// Values of f and |q|^2_sigma at the vertex classes of a mesh.
struct DifferentialSamples {
  std::vector<Complex> f;
  ScalarField norm2;
};

inline DifferentialSamples sample_differential(const CubicDifferential& q, const ConformalMesh& mesh) {
  DifferentialSamples out;
  const int n = mesh.class_count();
  out.f.resize(static_cast<std::size_t>(n));
  out.norm2.resize(n);
  for (int c = 0; c < n; ++c) {
    const Complex z = mesh.class_point(c);
    out.f[static_cast<std::size_t>(c)] = q(z);
    const double r = mesh.rho[static_cast<std::size_t>(mesh.class_representative[static_cast<std::size_t>(c)])];
    out.norm2[c] = std::norm(out.f[static_cast<std::size_t>(c)]) / (r * r * r);
  }
  return out;
}

/// Lumped-mass quadrature of f1 conj(f2) / rho^3 dv_sigma.
inline Complex l2_inner(const DifferentialSamples& q1, const DifferentialSamples& q2, const ConformalMesh& mesh) {
  Complex acc(0.0, 0.0);
  for (int c = 0; c < mesh.class_count(); ++c) {
    const double r = mesh.rho[static_cast<std::size_t>(mesh.class_representative[static_cast<std::size_t>(c)])];
    acc += q1.f[static_cast<std::size_t>(c)] * std::conj(q2.f[static_cast<std::size_t>(c)]) / (r * r * r) *
           mesh.mass[c];
  }
  return acc;
}

inline Complex l2_inner(const CubicDifferential& q1, const CubicDifferential& q2, const ConformalMesh& mesh) {
  return l2_inner(sample_differential(q1, mesh), sample_differential(q2, mesh), mesh);
}

struct ZeroSet {
  /// Zeros in the closed octagon, one per orbit, with multiplicities.
  std::vector<Complex> points;
  std::vector<int> multiplicity;
  /// Sum of multiplicities, the zero count of q on the surface.
  int total = 0;
};

/// Winding number of f around the Euclidean circle |z - center| = radius,
/// sampled finely enough that consecutive phase steps stay below pi/4.
inline int winding_number(const CubicDifferential& q, Complex center, double radius) {
  for (int samples = 64; samples <= 1 << 14; samples *= 2) {
    double total = 0.0, worst = 0.0;
    Complex prev = q(center + radius);
    for (int k = 1; k <= samples; ++k) {
      const Complex cur = q(center + std::polar(radius, 2.0 * std::numbers::pi * k / samples));
      const double step = std::arg(cur / prev);
      total += step;
      worst = std::max(worst, std::abs(step));
      prev = cur;
    }
    if (worst < std::numbers::pi / 4.0) return static_cast<int>(std::lround(total / (2.0 * std::numbers::pi)));
  }
  throw NumericalError("winding_number: phase not resolved (zero on the contour?)");
}

/// Zeros of q modulo the group. Candidates come from per-triangle winding
/// numbers of f on the mesh plus the octagon vertex (a cone point of the
/// tiling, where symmetric differentials tend to vanish); each is polished by
/// Newton's method, reduced into the octagon, and merged by orbit. The
/// multiplicity is the winding of f around a small disk circle, which also
/// covers zeros on the octagon boundary. On the surface the count is
/// 3 (2g - 2) = 6.
inline ZeroSet find_zeros(const CubicDifferential& q, const FuchsianGroup& group, const ConformalMesh& mesh) {
  if (q.is_zero()) throw ConfigError("find_zeros: zero differential has no isolated zeros");
  std::vector<Complex> raw_f(mesh.vertices.size());
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v) raw_f[v] = q(mesh.vertices[v]);

  std::vector<Complex> candidates{group.vertex(0)};
  for (const auto& tri : mesh.triangles) {
    double w = 0.0;
    bool degenerate = false;
    for (int k = 0; k < 3; ++k) {
      const Complex from = raw_f[static_cast<std::size_t>(tri[k])];
      const Complex to = raw_f[static_cast<std::size_t>(tri[(k + 1) % 3])];
      if (from == Complex(0.0) || to == Complex(0.0)) degenerate = true;
      else w += std::arg(to / from);
    }
    if (!degenerate && std::lround(w / (2.0 * std::numbers::pi)) == 0) continue;
    candidates.push_back((mesh.vertices[static_cast<std::size_t>(tri[0])] +
                          mesh.vertices[static_cast<std::size_t>(tri[1])] +
                          mesh.vertices[static_cast<std::size_t>(tri[2])]) / 3.0);
  }

  const auto same_orbit = [&](Complex x, Complex y, double tol) {
    if (hyperbolic_distance(x, y) < tol) return true;
    for (const auto& g : group.generators)
      if (hyperbolic_distance(g(x), y) < tol) return true;
    // The eight octagon corners are one point of the surface.
    const double rx = group.hyperbolic_circumradius - 2.0 * std::atanh(std::abs(x));
    const double ry = group.hyperbolic_circumradius - 2.0 * std::atanh(std::abs(y));
    return rx < tol && ry < tol;
  };

  ZeroSet out;
  std::vector<Complex> limits;
  constexpr double kMergeRadius = 1e-3;
  for (Complex z : candidates) {
    for (int it = 0; it < 200; ++it) {
      const Complex d = q.derivative(z);
      if (d == Complex(0.0)) break;
      const Complex step = q(z) / d;
      if (std::abs(z - step) >= 1.0) break;
      z -= step;
      if (std::abs(step) < 1e-15) break;
    }
    // Judge convergence before reducing: the truncated series is only
    // approximately automorphic, so the reduced copy may carry a small defect.
    if (std::abs(q(z)) > 1e-6 * (1.0 + std::abs(q.derivative(z)))) continue;
    const Complex reduced = reduce_to_domain(group, z).point;
    if (std::any_of(out.points.begin(), out.points.end(),
                    [&](Complex p) { return same_orbit(p, reduced, kMergeRadius); }))
      continue;
    out.points.push_back(reduced);
    limits.push_back(z);
  }
  // Multiplicities are measured at the Newton limits, where the truncated
  // series vanishes exactly, not at the reduced copies.
  for (Complex z : limits) {
    // A hyperbolic radius of a fraction of the merge radius, in Euclidean terms.
    const double radius = 0.25 * kMergeRadius * (1.0 - std::norm(z)) / 2.0;
    const int m = winding_number(q, z, radius);
    if (m <= 0) throw NumericalError("find_zeros: non-positive multiplicity at a Newton limit");
    out.multiplicity.push_back(m);
    out.total += m;
  }
  return out;
}

}  // namespace blaschke
