#pragma once

#include <cmath>
#include <complex>
#include <numbers>

namespace blaschke {

using Complex = std::complex<double>;

/// Orientation-preserving isometry of the Poincare disk, stored as an SU(1,1)
/// matrix [[a, b], [conj(b), conj(a)]] with |a|^2 - |b|^2 = 1, acting by
/// z -> (a z + b) / (conj(b) z + conj(a)). The matrix and its negative act
/// identically; `canonical()` picks the representative with Re(a) > 0.
class MoebiusTransform {
public:
  constexpr MoebiusTransform() = default;
  constexpr MoebiusTransform(Complex a, Complex b) : a_(a), b_(b) {}

  static MoebiusTransform identity() { return {Complex(1.0, 0.0), Complex(0.0, 0.0)}; }

  /// Rotation z -> e^{i theta} z about the origin.
  static MoebiusTransform rotation(double theta) {
    return {std::polar(1.0, theta / 2.0), Complex(0.0, 0.0)};
  }

  /// Hyperbolic translation by distance `length` along the real diameter, towards +1.
  static MoebiusTransform translation(double length) {
    return {Complex(std::cosh(length / 2.0), 0.0), Complex(std::sinh(length / 2.0), 0.0)};
  }

  /// Isometry sending 0 to `z` with derivative direction e^{i theta} at 0.
  static MoebiusTransform frame(Complex z, double theta) {
    const double s = 1.0 / std::sqrt(1.0 - std::norm(z));
    return {std::polar(s, theta / 2.0), z * std::polar(s, -theta / 2.0)};
  }

  /// Conjugates a real upper-half-plane matrix [[p, q], [r, s]] (ps - qr = 1)
  /// into the disk through the Cayley map w -> (w - i)/(w + i).
  static MoebiusTransform from_upper_half_plane(double p, double q, double r, double s) {
    const Complex i(0.0, 1.0);
    // C M C^{-1} with C = [[1, -i], [1, i]] / sqrt(2i); the SU(1,1) entries are
    // a = ((p + s) + i (q - r)) / 2 and b = ((p - s) - i (q + r)) / 2.
    return MoebiusTransform(0.5 * (Complex(p + s, 0.0) + i * (q - r)),
                            0.5 * (Complex(p - s, 0.0) - i * (q + r)))
        .normalized();
  }

  [[nodiscard]] Complex a() const { return a_; }
  [[nodiscard]] Complex b() const { return b_; }

  [[nodiscard]] double determinant() const { return std::norm(a_) - std::norm(b_); }
  [[nodiscard]] double trace() const { return 2.0 * a_.real(); }

  [[nodiscard]] Complex operator()(Complex z) const {
    return (a_ * z + b_) / (std::conj(b_) * z + std::conj(a_));
  }

  /// Complex derivative T'(z) = 1 / (conj(b) z + conj(a))^2.
  [[nodiscard]] Complex derivative(Complex z) const {
    const Complex d = std::conj(b_) * z + std::conj(a_);
    return 1.0 / (d * d);
  }

  [[nodiscard]] MoebiusTransform inverse() const { return {std::conj(a_), -b_}; }

  /// Rescales so the determinant is exactly one up to rounding.
  [[nodiscard]] MoebiusTransform normalized() const {
    const double det = determinant();
    const double s = 1.0 / std::sqrt(det);
    return {a_ * s, b_ * s};
  }

  /// Representative of {M, -M} with Re(a) > 0 (or Re(a) == 0, Im(a) > 0).
  [[nodiscard]] MoebiusTransform canonical() const {
    if (a_.real() < 0.0 || (a_.real() == 0.0 && a_.imag() < 0.0)) return {-a_, -b_};
    return *this;
  }

  /// Composition (*this) o other, renormalized.
  friend MoebiusTransform operator*(const MoebiusTransform& lhs, const MoebiusTransform& rhs) {
    return MoebiusTransform(lhs.a_ * rhs.a_ + lhs.b_ * std::conj(rhs.b_),
                            lhs.a_ * rhs.b_ + lhs.b_ * std::conj(rhs.a_))
        .normalized();
  }

  /// Entrywise distance up to sign, max over the four complex entries.
  [[nodiscard]] double distance(const MoebiusTransform& other) const {
    const auto dist = [](const MoebiusTransform& x, const MoebiusTransform& y) {
      return std::max(std::abs(x.a_ - y.a_), std::abs(x.b_ - y.b_));
    };
    return std::min(dist(*this, other), dist(*this, MoebiusTransform(-other.a_, -other.b_)));
  }

private:
  Complex a_{1.0, 0.0};
  Complex b_{0.0, 0.0};
};

/// Hyperbolic conformal factor of the disk, sigma = rho |dz|^2, curvature -1.
inline double conformal_factor(Complex z) {
  const double s = 1.0 - std::norm(z);
  return 4.0 / (s * s);
}

/// Hyperbolic distance in the disk model.
inline double hyperbolic_distance(Complex z, Complex w) {
  const double r = std::abs(z - w) / std::abs(1.0 - std::conj(z) * w);
  return 2.0 * std::atanh(std::min(r, 1.0));
}

}  // namespace blaschke
