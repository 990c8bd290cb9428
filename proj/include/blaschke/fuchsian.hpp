#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <unordered_map>
#include <utility>
#include <vector>

#include "blaschke/error.hpp"
#include "blaschke/moebius.hpp"

namespace blaschke {

/// Fuchsian group of the regular hyperbolic octagon with all interior angles
/// pi/4 and opposite sides paired (the Bolza surface, genus 2).
///
/// Side k is the geodesic perpendicular to the ray at angle k pi/4, at
/// hyperbolic distance `side_distance` from the origin. Vertex k sits between
/// sides k and k+1, at angle (2k+1) pi/8. Generator g_k = R(k pi/4) T R(-k pi/4)
/// translates by twice the side distance and maps side k+4 onto side k, so
/// g_{k+4} = g_k^{-1}.
struct FuchsianGroup {
  std::array<MoebiusTransform, 8> generators;
  /// Indices into `generators` whose ordered product is the identity.
  std::array<int, 8> relation{};
  /// Euclidean disk radius of the octagon vertices.
  double circumradius = 0.0;
  /// Hyperbolic circumradius.
  double hyperbolic_circumradius = 0.0;
  /// Hyperbolic distance from the origin to each side midpoint.
  double side_distance = 0.0;
  /// Hyperbolic length of one side.
  double side_length = 0.0;
  /// Side k lies on the circle |z - side_centers[k]| = side_radius, orthogonal to |z| = 1.
  std::array<Complex, 8> side_centers{};
  double side_radius = 0.0;

  [[nodiscard]] Complex vertex(int k) const {
    return std::polar(circumradius, (2 * k + 1) * std::numbers::pi / 8.0);
  }

  [[nodiscard]] Complex side_midpoint(int k) const {
    return std::polar(std::tanh(side_distance / 2.0), k * std::numbers::pi / 4.0);
  }

  /// Point on side k at signed hyperbolic arclength s from the midpoint,
  /// positive in the counter-clockwise direction.
  [[nodiscard]] Complex side_point(int k, double s) const {
    const Complex on_axis(0.0, std::tanh(s / 2.0));
    const Complex p = MoebiusTransform::translation(side_distance)(on_axis);
    return MoebiusTransform::rotation(k * std::numbers::pi / 4.0)(p);
  }

  /// Positive when z is strictly beyond side k (on the far side from the origin).
  [[nodiscard]] double side_violation(Complex z, int k) const {
    return side_radius - std::abs(z - side_centers[k]);
  }

  [[nodiscard]] bool contains(Complex z, double tol = 1e-12) const {
    for (int k = 0; k < 8; ++k)
      if (side_violation(z, k) > tol) return false;
    return std::abs(z) < 1.0;
  }

  /// Interior angle at vertex 0, measured between the tangents of the two side circles.
  [[nodiscard]] double interior_angle() const {
    const Complex v = vertex(0);
    const Complex t0 = Complex(0.0, 1.0) * (v - side_centers[0]);
    const Complex t1 = Complex(0.0, 1.0) * (v - side_centers[1]);
    // Interior angle is supplementary to the angle between the circle normals.
    const double between = std::abs(std::arg(t0 / t1));
    return std::numbers::pi - between;
  }
};

inline FuchsianGroup octagon_group() {
  using std::numbers::pi;
  FuchsianGroup group;
  const double cot8 = 1.0 / std::tan(pi / 8.0);  // 1 + sqrt(2)
  // Regular n-gon with interior angle alpha: cosh R = cot(pi/n) cot(alpha/2),
  // cosh d = cos(alpha/2) / sin(pi/n), cosh(side/2) = cos(pi/n) / sin(alpha/2).
  group.hyperbolic_circumradius = std::acosh(cot8 * cot8);
  group.side_distance = std::acosh(std::cos(pi / 8.0) / std::sin(pi / 8.0));
  group.side_length = 2.0 * std::acosh(std::cos(pi / 8.0) / std::sin(pi / 8.0));
  group.circumradius = std::tanh(group.hyperbolic_circumradius / 2.0);

  const double x_mid = std::tanh(group.side_distance / 2.0);
  const double sum = 1.0 / x_mid;  // c + r for the orthogonal circle through x_mid
  const double center = 0.5 * (sum + x_mid);
  group.side_radius = 0.5 * (sum - x_mid);

  const MoebiusTransform t = MoebiusTransform::translation(2.0 * group.side_distance);
  for (int k = 0; k < 8; ++k) {
    const auto r = MoebiusTransform::rotation(k * pi / 4.0);
    group.generators[k] = (r * t * r.inverse()).canonical();
    group.side_centers[k] = std::polar(center, k * pi / 4.0);
  }
  // g0 g1^{-1} g2 g3^{-1} g0^{-1} g1 g2^{-1} g3 = 1
  group.relation = {0, 5, 2, 7, 4, 1, 6, 3};
  return group;
}

/// Product of the relation word, which should be +-identity.
inline MoebiusTransform relation_product(const FuchsianGroup& group) {
  auto m = MoebiusTransform::identity();
  for (int idx : group.relation) m = m * group.generators[idx];
  return m;
}

/// Distinct group elements of word length <= N, grouped by length.
struct WordTable {
  std::vector<MoebiusTransform> elements;
  /// level_offsets[n] is the index of the first element first reached at length n;
  /// level_offsets.back() == elements.size().
  std::vector<std::size_t> level_offsets;

  [[nodiscard]] std::size_t size() const { return elements.size(); }
};

namespace detail {

class ElementIndex {
public:
  static constexpr double kQuantum = 1e-5;
  static constexpr double kMatchTolerance = 1e-8;

  explicit ElementIndex(const std::vector<MoebiusTransform>& store) : store_(store) {}

  /// Index of a stored element within the match tolerance, or -1.
  [[nodiscard]] long find(const MoebiusTransform& m) const {
    const auto c = m.canonical();
    const std::array<double, 4> x{c.a().real(), c.a().imag(), c.b().real(), c.b().imag()};
    std::array<std::int64_t, 4> base{};
    std::array<int, 4> alt{};
    for (int i = 0; i < 4; ++i) {
      const double q = x[i] / kQuantum;
      base[i] = static_cast<std::int64_t>(std::floor(q));
      const double frac = q - std::floor(q);
      alt[i] = frac < 1e-2 ? -1 : (frac > 1.0 - 1e-2 ? 1 : 0);
    }
    for (int mask = 0; mask < 16; ++mask) {
      std::array<std::int64_t, 4> key = base;
      bool valid = true;
      for (int i = 0; i < 4; ++i) {
        if (mask & (1 << i)) {
          if (alt[i] == 0) { valid = false; break; }
          key[i] += alt[i];
        }
      }
      if (!valid) continue;
      const auto it = buckets_.find(hash(key));
      if (it == buckets_.end()) continue;
      for (long idx : it->second)
        if (store_[idx].distance(m) < kMatchTolerance) return idx;
    }
    return -1;
  }

  void insert(const MoebiusTransform& m, long idx) {
    const auto c = m.canonical();
    const std::array<double, 4> x{c.a().real(), c.a().imag(), c.b().real(), c.b().imag()};
    std::array<std::int64_t, 4> key{};
    for (int i = 0; i < 4; ++i) key[i] = static_cast<std::int64_t>(std::floor(x[i] / kQuantum));
    buckets_[hash(key)].push_back(idx);
  }

private:
  static std::uint64_t hash(const std::array<std::int64_t, 4>& key) {
    std::uint64_t h = 1469598103934665603ULL;
    for (auto v : key) {
      h ^= static_cast<std::uint64_t>(v) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
      h *= 1099511628211ULL;
    }
    return h;
  }

  const std::vector<MoebiusTransform>& store_;
  std::unordered_map<std::uint64_t, std::vector<long>> buckets_;
};

}  // namespace detail

/// Breadth-first enumeration of group elements represented by words of length
/// <= max_length in the generators (the generator list is closed under inverse).
/// Elements within 1e-8 entrywise (up to sign) are identified.
inline WordTable enumerate_words(const FuchsianGroup& group, int max_length,
                                 std::size_t cap = 4'000'000) {
  detail::require(max_length >= 0, "enumerate_words: word length must be non-negative");
  WordTable table;
  table.elements.push_back(MoebiusTransform::identity());
  table.level_offsets = {0, 1};
  detail::ElementIndex index(table.elements);
  index.insert(table.elements.front(), 0);

  for (int level = 1; level <= max_length; ++level) {
    const std::size_t begin = table.level_offsets[level - 1];
    const std::size_t end = table.level_offsets[level];
    for (std::size_t i = begin; i < end; ++i) {
      for (const auto& g : group.generators) {
        const auto candidate = (table.elements[i] * g).canonical();
        if (index.find(candidate) >= 0) continue;
        if (table.elements.size() >= cap)
          throw ResourceLimitError("enumerate_words: element count exceeds cap of " +
                                   std::to_string(cap));
        table.elements.push_back(candidate);
        index.insert(candidate, static_cast<long>(table.elements.size() - 1));
      }
    }
    table.level_offsets.push_back(table.elements.size());
  }
  return table;
}

struct Reduction {
  Complex point;
  /// Maps `point` back to the input: word(point) == z.
  MoebiusTransform word;
  int steps = 0;
};

/// Greedy side-crossing reduction into the closed fundamental octagon. The
/// octagon is the Dirichlet domain of the origin, so each crossing strictly
/// decreases the distance to the origin.
inline Reduction reduce_to_domain(const FuchsianGroup& group, Complex z, int max_steps = 10'000) {
  detail::require(std::abs(z) < 1.0, "reduce_to_domain: point must lie in the open unit disk");
  Reduction out{z, MoebiusTransform::identity(), 0};
  for (; out.steps <= max_steps; ++out.steps) {
    int worst = -1;
    double worst_violation = 1e-13;
    for (int k = 0; k < 8; ++k) {
      const double v = group.side_violation(out.point, k) / group.side_radius;
      if (v > worst_violation) {
        worst_violation = v;
        worst = k;
      }
    }
    if (worst < 0) return out;
    const auto& g = group.generators[worst];
    out.point = g.inverse()(out.point);
    out.word = out.word * g;
  }
  throw NumericalError("reduce_to_domain: no convergence within step limit (malformed group?)");
}

struct AxisData {
  double translation_length = 0.0;
  /// Repelling and attracting fixed points on the unit circle.
  Complex repelling;
  Complex attracting;
};

inline AxisData axis_data(const MoebiusTransform& t) {
  const double half_trace = std::abs(t.a().real());
  if (!(half_trace > 1.0))
    throw ConfigError("axis_data: element is not hyperbolic (|trace| <= 2)");
  const auto c = t.canonical();
  const double root = std::sqrt(c.a().real() * c.a().real() - 1.0);
  const Complex num_common(0.0, c.a().imag());
  const Complex bbar = std::conj(c.b());
  const Complex p1 = (num_common + root) / bbar;
  const Complex p2 = (num_common - root) / bbar;
  AxisData out;
  out.translation_length = 2.0 * std::acosh(half_trace);
  // Attracting fixed point has |T'(p)| < 1.
  if (std::abs(c.derivative(p1)) < 1.0) {
    out.attracting = p1;
    out.repelling = p2;
  } else {
    out.attracting = p2;
    out.repelling = p1;
  }
  return out;
}

}  // namespace blaschke
