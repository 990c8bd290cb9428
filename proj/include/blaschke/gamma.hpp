#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <numbers>

#include "blaschke/error.hpp"
#include "blaschke/moebius.hpp"

namespace blaschke {

namespace detail {

// Lanczos approximation, g = 7, n = 9.
inline constexpr double kLanczosG = 7.0;
inline constexpr std::array<double, 9> kLanczos{
    0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
    771.32342877765313,   -176.61502916214059,   12.507343278686905,
    -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};

/// log sin(pi z) without overflow for large |Im z|; imaginary part mod 2 pi.
inline Complex log_sin_pi(Complex z) {
  const Complex i(0.0, 1.0);
  if (std::abs(z.imag()) < 20.0) return std::log(std::sin(std::numbers::pi * z));
  if (z.imag() < 0.0) return std::conj(log_sin_pi(std::conj(z)));
  // sin(pi z) = (i/2) e^{-i pi z} (1 - e^{2 i pi z}), and |e^{2 i pi z}| is tiny here.
  return std::log(Complex(0.0, 0.5)) - i * std::numbers::pi * z +
         std::log(1.0 - std::exp(2.0 * i * std::numbers::pi * z));
}

}  // namespace detail

/// Complex log Gamma. The real part is log |Gamma(z)|; the imaginary part is
/// correct modulo 2 pi. Poles (z = 0, -1, -2, ...) are rejected.
inline Complex log_gamma(Complex z) {
  if (z.imag() == 0.0 && z.real() <= 0.0 && z.real() == std::floor(z.real()))
    throw ConfigError("log_gamma: pole at a non-positive integer");
  if (z.real() < 0.5) {
    // Reflection: Gamma(z) Gamma(1 - z) = pi / sin(pi z).
    return std::log(std::numbers::pi) - detail::log_sin_pi(z) - log_gamma(1.0 - z);
  }
  z -= 1.0;
  Complex x = detail::kLanczos[0];
  for (std::size_t i = 1; i < detail::kLanczos.size(); ++i) x += detail::kLanczos[i] / (z + static_cast<double>(i));
  const Complex t = z + detail::kLanczosG + 0.5;
  return 0.5 * std::log(2.0 * std::numbers::pi) + (z + 0.5) * std::log(t) - t + std::log(x);
}

/// Spectral multiplier
///   Gamma(1/4 - L) Gamma(1/4 + L) / (Gamma(3/4 - L) Gamma(3/4 + L)),
///   L = (i/2) sqrt(lambda - 1/4),
/// for a positive Laplace eigenvalue lambda. For lambda >= 1/4, L = i y and the
/// value is |Gamma(1/4 + i y)|^2 / |Gamma(3/4 + i y)|^2; below 1/4, L is real. The
/// expression is even in L and positive in both regimes. Decreasing in lambda,
/// with gamma_ratio(lambda) sqrt(lambda) -> 2.
inline double gamma_ratio(double lambda) {
  detail::require(lambda > 0.0 && std::isfinite(lambda), "gamma_ratio: eigenvalue must be positive and finite");
  Complex l;
  if (lambda >= 0.25) l = Complex(0.0, 0.5 * std::sqrt(lambda - 0.25));
  else l = Complex(0.5 * std::sqrt(0.25 - lambda), 0.0);
  const Complex s = log_gamma(0.25 - l) + log_gamma(0.25 + l) - log_gamma(0.75 - l) - log_gamma(0.75 + l);
  return std::exp(s.real());
}

}  // namespace blaschke
