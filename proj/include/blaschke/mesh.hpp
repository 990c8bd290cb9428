#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "blaschke/error.hpp"
#include "blaschke/fuchsian.hpp"
#include "blaschke/moebius.hpp"

namespace blaschke {

/// One real value per identified vertex class of a ConformalMesh.
using ScalarField = Eigen::VectorXd;

/// Raw boundary vertex `from` (on side k+4) is carried onto raw vertex `to`
/// (on side k) by generator k.
struct BoundaryPair {
  int from = -1;
  int to = -1;
  int generator = -1;
};

struct Barycentric {
  int triangle = -1;
  std::array<double, 3> weights{};
};

/// Uniform-grid bucket index for point location in a planar triangulation.
class PointLocator {
public:
  PointLocator() = default;

  PointLocator(const std::vector<Complex>& vertices, const std::vector<std::array<int, 3>>& triangles,
               double extent, int cells)
      : extent_(extent), cells_(cells), buckets_(static_cast<std::size_t>(cells) * cells) {
    for (std::size_t t = 0; t < triangles.size(); ++t) {
      double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
      for (int v : triangles[t]) {
        xmin = std::min(xmin, vertices[v].real());
        xmax = std::max(xmax, vertices[v].real());
        ymin = std::min(ymin, vertices[v].imag());
        ymax = std::max(ymax, vertices[v].imag());
      }
      const int i0 = cell(xmin), i1 = cell(xmax), j0 = cell(ymin), j1 = cell(ymax);
      for (int i = i0; i <= i1; ++i)
        for (int j = j0; j <= j1; ++j) buckets_[index(i, j)].push_back(static_cast<int>(t));
    }
  }

  /// Triangle containing z with barycentric weights; points slightly outside
  /// every triangle are snapped to the best candidate when within `slack`.
  [[nodiscard]] Barycentric locate(Complex z, const std::vector<Complex>& vertices,
                                   const std::vector<std::array<int, 3>>& triangles,
                                   double slack = 1e-6) const {
    Barycentric best;
    double best_min = -1e300;
    const int ci = cell(z.real()), cj = cell(z.imag());
    const auto scan = [&](int i, int j) {
      if (i < 0 || j < 0 || i >= cells_ || j >= cells_) return false;
      for (int t : buckets_[index(i, j)]) {
        const auto w = weights(z, vertices, triangles[t]);
        const double m = std::min({w[0], w[1], w[2]});
        if (m > best_min) {
          best_min = m;
          best = {t, w};
        }
        if (m >= -1e-12) return true;
      }
      return false;
    };
    if (scan(ci, cj)) return best;
    for (int i = ci - 1; i <= ci + 1; ++i)
      for (int j = cj - 1; j <= cj + 1; ++j)
        if ((i != ci || j != cj) && scan(i, j)) return best;
    if (best_min >= -slack) return best;
    return {};
  }

  static std::array<double, 3> weights(Complex z, const std::vector<Complex>& vertices,
                                       const std::array<int, 3>& tri) {
    const Complex p0 = vertices[tri[0]];
    const Complex e1 = vertices[tri[1]] - p0, e2 = vertices[tri[2]] - p0, d = z - p0;
    const auto cross = [](Complex u, Complex v) { return u.real() * v.imag() - u.imag() * v.real(); };
    const double area = cross(e1, e2);
    const double alpha = cross(d, e2) / area;
    const double beta = cross(e1, d) / area;
    return {1.0 - alpha - beta, alpha, beta};
  }

private:
  [[nodiscard]] int cell(double x) const {
    const int c = static_cast<int>(std::floor((x + extent_) / (2.0 * extent_) * cells_));
    return std::clamp(c, 0, cells_ - 1);
  }
  [[nodiscard]] std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(i) * cells_ + j;
  }

  double extent_ = 1.0;
  int cells_ = 1;
  std::vector<std::vector<int>> buckets_;
};

/// Triangulated fundamental octagon with side-pairing identifications.
///
/// Raw vertices carry disk coordinates; scalar fields live on identified
/// vertex classes. Masses are hyperbolic areas of the geodesic triangles with
/// the same vertices, lumped one third per corner, so they sum to the exact
/// area 4 pi of the genus-2 surface.
struct ConformalMesh {
  std::vector<Complex> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<int> vertex_class;
  std::vector<int> class_representative;
  std::vector<double> rho;
  std::vector<double> triangle_area;
  ScalarField mass;
  std::vector<BoundaryPair> pairings;
  /// -1 for interior vertices, k for vertices interior to side k, 8 + k for vertex k.
  std::vector<int> boundary_tag;
  int resolution = 0;
  PointLocator locator;

  [[nodiscard]] int class_count() const { return static_cast<int>(class_representative.size()); }
  [[nodiscard]] Complex class_point(int c) const { return vertices[class_representative[c]]; }
  [[nodiscard]] double total_mass() const { return mass.sum(); }

  [[nodiscard]] Barycentric locate(Complex z, double slack = 1e-6) const {
    return locator.locate(z, vertices, triangles, slack);
  }

  /// Piecewise-linear interpolation of a class field at a point of the mesh region.
  [[nodiscard]] double interpolate(const ScalarField& field, Complex z) const {
    const auto bc = locate(z);
    if (bc.triangle < 0) throw NumericalError("interpolate: point outside the mesh");
    const auto& tri = triangles[bc.triangle];
    return bc.weights[0] * field[vertex_class[tri[0]]] + bc.weights[1] * field[vertex_class[tri[1]]] +
           bc.weights[2] * field[vertex_class[tri[2]]];
  }

  /// Expands a class field onto raw vertices.
  [[nodiscard]] Eigen::VectorXd to_raw(const ScalarField& field) const {
    Eigen::VectorXd out(static_cast<Eigen::Index>(vertices.size()));
    for (std::size_t v = 0; v < vertices.size(); ++v) out[v] = field[vertex_class[v]];
    return out;
  }

  /// Samples a function of disk position at the class representatives.
  template <class F>
  [[nodiscard]] ScalarField sample(F&& f) const {
    ScalarField out(class_count());
    for (int c = 0; c < class_count(); ++c) out[c] = f(class_point(c));
    return out;
  }
};

namespace detail {

class UnionFind {
public:
  explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  int find(int x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

private:
  std::vector<int> parent_;
};

/// Hyperbolic interior angle at p of the geodesic triangle (p, q, r).
inline double hyperbolic_angle(Complex p, Complex q, Complex r) {
  const Complex u = (q - p) / (1.0 - std::conj(p) * q);
  const Complex v = (r - p) / (1.0 - std::conj(p) * r);
  return std::abs(std::arg(u / v));
}

inline double euclidean_angle(Complex p, Complex q, Complex r) {
  return std::abs(std::arg((q - p) / (r - p)));
}

}  // namespace detail

/// Area of the geodesic triangle with the given vertices (Gauss-Bonnet, K = -1).
inline double geodesic_triangle_area(Complex p, Complex q, Complex r) {
  return std::numbers::pi - detail::hyperbolic_angle(p, q, r) - detail::hyperbolic_angle(q, r, p) -
         detail::hyperbolic_angle(r, p, q);
}

struct MeshOptions {
  /// Smallest admissible Euclidean triangle angle, radians.
  double angle_floor = 10.0 * std::numbers::pi / 180.0;
  int max_resolution = 400;
};

namespace detail {

/// Raw vertices along one side, ordered by signed arclength from the midpoint.
struct SideChain {
  std::vector<double> arclength;
  std::vector<int> vertex;
};

inline double cross2(Complex u, Complex v) { return u.real() * v.imag() - u.imag() * v.real(); }

inline std::uint64_t edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

/// Incident (triangle, opposite corner) pairs of every raw edge.
inline std::unordered_map<std::uint64_t, std::vector<std::pair<int, int>>> edge_incidence(
    const std::vector<std::array<int, 3>>& triangles) {
  std::unordered_map<std::uint64_t, std::vector<std::pair<int, int>>> out;
  out.reserve(triangles.size() * 2);
  for (std::size_t t = 0; t < triangles.size(); ++t)
    for (int k = 0; k < 3; ++k)
      out[edge_key(triangles[t][(k + 1) % 3], triangles[t][(k + 2) % 3])].emplace_back(static_cast<int>(t), k);
  return out;
}

inline double corner_angle(const std::vector<Complex>& v, const std::array<int, 3>& tri, int k) {
  return euclidean_angle(v[tri[k]], v[tri[(k + 1) % 3]], v[tri[(k + 2) % 3]]);
}

/// One sweep of Lawson flips over interior raw edges. Returns the flip count.
inline int lawson_sweep(const std::vector<Complex>& v, std::vector<std::array<int, 3>>& triangles) {
  const auto incidence = edge_incidence(triangles);
  std::vector<char> touched(triangles.size(), 0);
  int flips = 0;
  for (const auto& [key, inc] : incidence) {
    if (inc.size() != 2) continue;
    const auto [t1, k1] = inc[0];
    const auto [t2, k2] = inc[1];
    if (touched[t1] || touched[t2]) continue;
    const double sum = corner_angle(v, triangles[t1], k1) + corner_angle(v, triangles[t2], k2);
    if (sum <= std::numbers::pi + 1e-12) continue;
    const int a = triangles[t1][k1], b = triangles[t2][k2];
    const int i = triangles[t1][(k1 + 1) % 3], j = triangles[t1][(k1 + 2) % 3];
    // Triangle t1 = (a, i, j) is counter-clockwise; the flipped pair is (a, i, b), (a, b, j).
    if (cross2(v[i] - v[a], v[b] - v[a]) <= 0.0 || cross2(v[b] - v[a], v[j] - v[a]) <= 0.0) continue;
    triangles[t1] = {a, i, b};
    triangles[t2] = {a, b, j};
    touched[t1] = touched[t2] = 1;
    ++flips;
  }
  return flips;
}

}  // namespace detail

/// Structured triangulation of the octagon: eight sectors (origin, vertex k-1,
/// vertex k), each subdivided into `n` levels placed at equal hyperbolic radial
/// spacing, with boundary vertices at equal hyperbolic arclength along each side.
/// `h` is the target hyperbolic edge length along the sector rays.
///
/// The structured layout is then made Delaunay for the glued surface: interior
/// edges are flipped, and a glued side edge whose two opposite angles exceed pi
/// is split at its midpoint on both paired sides. All cotangent weights of the
/// result are non-negative, so the stiffness matrix is an M-matrix.
inline ConformalMesh build_octagon_mesh(const FuchsianGroup& group, double h, MeshOptions options = {}) {
  detail::require(h > 0.0, "build_octagon_mesh: edge length must be positive");
  const double levels = std::ceil(group.hyperbolic_circumradius / h);
  if (!(levels <= options.max_resolution))
    throw NumericalError("build_octagon_mesh: edge length " + std::to_string(h) +
                         " below resolution floor");
  const int n = std::max(2, static_cast<int>(levels));

  ConformalMesh mesh;
  mesh.resolution = n;
  const std::size_t structured_count = 1 + 4 * static_cast<std::size_t>(n) * (n + 1);
  mesh.vertices.resize(structured_count);
  mesh.boundary_tag.assign(structured_count, -1);

  const auto node = [](int s, int i, int j) -> int {
    if (i == 0) return 0;
    if (j == i) {
      s = (s + 1) % 8;
      j = 0;
    }
    return 1 + 4 * (i - 1) * i + s * i + j;
  };

  std::array<detail::SideChain, 8> chains;
  mesh.vertices[0] = Complex(0.0, 0.0);
  for (int s = 0; s < 8; ++s) {
    for (int i = 1; i <= n; ++i) {
      for (int j = 0; j < i; ++j) {
        const double tau = static_cast<double>(j) / i;
        const Complex c = group.side_point(s, (tau - 0.5) * group.side_length);
        const double radial = 2.0 * std::atanh(std::abs(c));
        const double r = std::tanh(0.5 * radial * i / n);
        mesh.vertices[node(s, i, j)] = std::polar(r, std::arg(c));
      }
    }
    // Boundary points are placed exactly on the side geodesic.
    for (int j = 0; j <= n; ++j) {
      const double arclength = (static_cast<double>(j) / n - 0.5) * group.side_length;
      const int v = node(s, n, j);
      chains[s].arclength.push_back(arclength);
      chains[s].vertex.push_back(v);
      if (j == n) continue;
      mesh.vertices[v] = group.side_point(s, arclength);
      mesh.boundary_tag[v] = j == 0 ? 8 + (s + 7) % 8 : s;
    }
  }

  for (int s = 0; s < 8; ++s) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j <= i; ++j) {
        mesh.triangles.push_back({node(s, i, j), node(s, i + 1, j), node(s, i + 1, j + 1)});
        if (j < i) mesh.triangles.push_back({node(s, i, j), node(s, i + 1, j + 1), node(s, i, j + 1)});
      }
    }
  }
  for (auto& tri : mesh.triangles) {
    const Complex a = mesh.vertices[tri[0]], b = mesh.vertices[tri[1]], c = mesh.vertices[tri[2]];
    if (detail::cross2(b - a, c - a) < 0.0) std::swap(tri[1], tri[2]);
  }

  // Side s+4 is carried onto side s by g_s with arclength parameter negated.
  const auto split_glued_edges = [&]() {
    const auto incidence = detail::edge_incidence(mesh.triangles);
    const auto opposite = [&](int a, int b) -> std::pair<int, int> {
      const auto it = incidence.find(detail::edge_key(a, b));
      if (it == incidence.end() || it->second.size() != 1)
        throw NumericalError("build_octagon_mesh: side edge without a unique triangle");
      return it->second.front();
    };
    struct Split {
      int side, position;
    };
    std::vector<Split> splits;
    for (int s = 0; s < 4; ++s) {
      const auto& chain = chains[s];
      const int m = static_cast<int>(chain.vertex.size()) - 1;
      for (int p = 0; p < m; ++p) {
        const auto [t1, k1] = opposite(chain.vertex[p], chain.vertex[p + 1]);
        const auto& partner = chains[s + 4];
        const auto [t2, k2] = opposite(partner.vertex[m - p - 1], partner.vertex[m - p]);
        const double sum = detail::corner_angle(mesh.vertices, mesh.triangles[t1], k1) +
                           detail::corner_angle(mesh.vertices, mesh.triangles[t2], k2);
        if (sum > std::numbers::pi + 1e-12) splits.push_back({s, p});
      }
    }
    // Apply from the back so chain positions stay valid.
    std::sort(splits.begin(), splits.end(),
              [](const Split& x, const Split& y) { return x.side != y.side ? x.side < y.side : x.position > y.position; });
    // A triangle split once is stale in `incidence`; later splits touching it wait a round.
    std::vector<char> modified(mesh.triangles.size(), 0);
    int applied = 0;
    for (const auto& split : splits) {
      std::array<std::pair<int, int>, 2> targets;
      for (int q = 0; q < 2; ++q) {
        const int side = split.side + 4 * q;
        const auto& chain = chains[side];
        const int m = static_cast<int>(chain.vertex.size()) - 1;
        const int p = q == 0 ? split.position : m - split.position - 1;
        targets[q] = opposite(chain.vertex[p], chain.vertex[p + 1]);
      }
      if (modified[targets[0].first] || modified[targets[1].first]) continue;
      modified[targets[0].first] = modified[targets[1].first] = 1;
      ++applied;
      for (int side : {split.side, split.side + 4}) {
        auto& chain = chains[side];
        const int m = static_cast<int>(chain.vertex.size()) - 1;
        const int p = side == split.side ? split.position : m - split.position - 1;
        const int a = chain.vertex[p], b = chain.vertex[p + 1];
        const double arclength = 0.5 * (chain.arclength[p] + chain.arclength[p + 1]);
        const int fresh = static_cast<int>(mesh.vertices.size());
        mesh.vertices.push_back(group.side_point(side, arclength));
        mesh.boundary_tag.push_back(side);
        chain.arclength.insert(chain.arclength.begin() + p + 1, arclength);
        chain.vertex.insert(chain.vertex.begin() + p + 1, fresh);
        const auto [t, k] = opposite(a, b);
        auto tri = mesh.triangles[t];
        const int c = tri[k];
        const int i = tri[(k + 1) % 3], j = tri[(k + 2) % 3];
        mesh.triangles[t] = {c, i, fresh};
        mesh.triangles.push_back({c, fresh, j});
      }
    }
    return applied;
  };

  for (int round = 0;; ++round) {
    if (round > 10 * n + 100) throw NumericalError("build_octagon_mesh: Delaunay refinement did not settle");
    if (detail::lawson_sweep(mesh.vertices, mesh.triangles) > 0) continue;
    if (split_glued_edges() == 0) break;
  }

  for (const auto& tri : mesh.triangles) {
    const Complex a = mesh.vertices[tri[0]], b = mesh.vertices[tri[1]], c = mesh.vertices[tri[2]];
    if (detail::cross2(b - a, c - a) <= 0.0)
      throw NumericalError("build_octagon_mesh: inverted triangle");
    const double min_angle = std::min({detail::euclidean_angle(a, b, c), detail::euclidean_angle(b, c, a),
                                       detail::euclidean_angle(c, a, b)});
    if (min_angle < options.angle_floor)
      throw NumericalError("build_octagon_mesh: sliver triangle below angle floor");
  }

  const std::size_t vertex_count = mesh.vertices.size();
  detail::UnionFind classes(vertex_count);
  for (int s = 0; s < 4; ++s) {
    const auto& g = group.generators[s];
    const auto& to_chain = chains[s];
    const auto& from_chain = chains[s + 4];
    const std::size_t m = to_chain.vertex.size();
    for (std::size_t p = 0; p < m; ++p) {
      const int from = from_chain.vertex[p];
      const int to = to_chain.vertex[m - 1 - p];
      if (std::abs(g(mesh.vertices[from]) - mesh.vertices[to]) > 1e-9)
        throw NumericalError("build_octagon_mesh: side pairing mismatch");
      mesh.pairings.push_back({from, to, s});
      classes.unite(from, to);
    }
  }

  std::vector<int> root_to_class(vertex_count, -1);
  mesh.vertex_class.resize(vertex_count);
  for (std::size_t v = 0; v < vertex_count; ++v) {
    const int root = classes.find(static_cast<int>(v));
    if (root_to_class[root] < 0) {
      root_to_class[root] = static_cast<int>(mesh.class_representative.size());
      mesh.class_representative.push_back(static_cast<int>(v));
    }
    mesh.vertex_class[v] = root_to_class[root];
  }

  mesh.rho.resize(vertex_count);
  for (std::size_t v = 0; v < vertex_count; ++v) mesh.rho[v] = conformal_factor(mesh.vertices[v]);

  mesh.mass = ScalarField::Zero(mesh.class_count());
  mesh.triangle_area.reserve(mesh.triangles.size());
  for (const auto& tri : mesh.triangles) {
    const double area =
        geodesic_triangle_area(mesh.vertices[tri[0]], mesh.vertices[tri[1]], mesh.vertices[tri[2]]);
    mesh.triangle_area.push_back(area);
    for (int v : tri) mesh.mass[mesh.vertex_class[v]] += area / 3.0;
  }

  const int cells = std::max(8, static_cast<int>(std::sqrt(static_cast<double>(mesh.triangles.size()) / 2.0)));
  mesh.locator = PointLocator(mesh.vertices, mesh.triangles, group.circumradius * 1.001 + 1e-3, cells);
  return mesh;
}

/// V - E + F of the identified cell complex. Glued side edges count once per pair;
/// parallel edges between the same vertex classes are distinct cells.
inline int euler_characteristic(const ConformalMesh& mesh) {
  const auto incidence = detail::edge_incidence(mesh.triangles);
  int interior = 0, boundary = 0;
  for (const auto& [key, inc] : incidence) (inc.size() == 2 ? interior : boundary) += 1;
  if (boundary % 2 != 0) throw InvariantError("euler_characteristic: unpaired boundary edge");
  return mesh.class_count() - (interior + boundary / 2) + static_cast<int>(mesh.triangles.size());
}

/// Sum of field * mass.
inline double integrate(const ScalarField& field, const ConformalMesh& mesh) {
  return field.dot(mesh.mass);
}

/// Integral against the normalized (probability) area measure.
inline double integrate_normalized(const ScalarField& field, const ConformalMesh& mesh) {
  return field.dot(mesh.mass) / mesh.total_mass();
}

}  // namespace blaschke
