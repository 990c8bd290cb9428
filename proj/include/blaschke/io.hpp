#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "blaschke/cubic_differential.hpp"
#include "blaschke/error.hpp"
#include "blaschke/fuchsian.hpp"
#include "blaschke/mesh.hpp"

namespace blaschke {

using Json = nlohmann::ordered_json;

/// 17 significant digits; non-finite values become null.
inline std::string format_double(double x) {
  if (!std::isfinite(x)) return "null";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace detail {

inline void write_json(std::ostream& os, const Json& j, int indent, int depth) {
  const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
  const std::string close(static_cast<std::size_t>(indent * depth), ' ');
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        os << "{}";
        return;
      }
      os << "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) os << ",\n";
        first = false;
        os << pad << Json(it.key()).dump() << ": ";
        write_json(os, it.value(), indent, depth + 1);
      }
      os << "\n" << close << "}";
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        os << "[]";
        return;
      }
      // Arrays of scalars stay on one line.
      bool flat = true;
      for (const auto& e : j) flat = flat && !e.is_structured();
      os << (flat ? "[" : "[\n");
      bool first = true;
      for (const auto& e : j) {
        if (!first) os << (flat ? ", " : ",\n");
        first = false;
        if (!flat) os << pad;
        write_json(os, e, indent, depth + 1);
      }
      if (!flat) os << "\n" << close;
      os << "]";
      return;
    }
    case Json::value_t::number_float:
      os << format_double(j.get<double>());
      return;
    default:
      os << j.dump();
  }
}

}  // namespace detail

/// Deterministic JSON text: insertion-ordered keys, floats at %.17g.
inline std::string dump_json(const Json& j, int indent = 2) {
  std::ostringstream os;
  detail::write_json(os, j, indent, 0);
  os << "\n";
  return os.str();
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw ConfigError("write failed for " + path.string());
}

/// Minimal CSV table with a fixed header.
class CsvTable {
public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  void add(const std::vector<double>& row) {
    detail::require(row.size() == header_.size(), "CsvTable: row width does not match the header");
    rows_.push_back(row);
  }

  [[nodiscard]] std::string str() const {
    std::string out;
    for (std::size_t i = 0; i < header_.size(); ++i) out += (i ? "," : "") + header_[i];
    out += "\n";
    for (const auto& r : rows_) {
      for (std::size_t i = 0; i < r.size(); ++i) out += (i ? "," : "") + format_double(r[i]);
      out += "\n";
    }
    return out;
  }

  [[nodiscard]] std::size_t size() const { return rows_.size(); }

private:
  std::vector<std::string> header_;
  std::vector<std::vector<double>> rows_;
};

inline Json complex_json(Complex z) { return Json::array({z.real(), z.imag()}); }

/// Generators as row-major real and imaginary parts of [[a, b], [conj b, conj a]].
inline Json group_json(const FuchsianGroup& group) {
  Json gens = Json::array();
  for (int k = 0; k < 8; ++k) {
    const auto& g = group.generators[static_cast<std::size_t>(k)];
    const Complex a = g.a(), b = g.b();
    gens.push_back({{"index", k},
                    {"matrix", Json::array({complex_json(a), complex_json(b), complex_json(std::conj(b)),
                                            complex_json(std::conj(a))})}});
  }
  return {{"model", "disk SU(1,1)"},
          {"generators", gens},
          {"relation", group.relation},
          {"circumradius", group.circumradius},
          {"hyperbolic_circumradius", group.hyperbolic_circumradius},
          {"side_length", group.side_length}};
}

inline Json mesh_json(const ConformalMesh& mesh) {
  Json vertices = Json::array(), triangles = Json::array(), pairings = Json::array();
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v)
    vertices.push_back(Json::array({mesh.vertices[v].real(), mesh.vertices[v].imag(), mesh.vertex_class[v]}));
  for (const auto& t : mesh.triangles) triangles.push_back(Json::array({t[0], t[1], t[2]}));
  for (const auto& p : mesh.pairings) pairings.push_back(Json::array({p.from, p.to, p.generator}));
  return {{"vertices", vertices}, {"triangles", triangles}, {"pairings", pairings}, {"classes", mesh.class_count()}};
}

/// Class fields keyed by class id.
inline std::string fields_csv(const ConformalMesh& mesh, const std::vector<std::string>& names,
                              const std::vector<const ScalarField*>& fields) {
  std::vector<std::string> header{"class", "x", "y"};
  header.insert(header.end(), names.begin(), names.end());
  CsvTable table(header);
  for (int c = 0; c < mesh.class_count(); ++c) {
    std::vector<double> row{static_cast<double>(c), mesh.class_point(c).real(), mesh.class_point(c).imag()};
    for (const auto* f : fields) row.push_back((*f)[c]);
    table.add(row);
  }
  return table.str();
}

inline std::string samples_csv(const ConformalMesh& mesh, const DifferentialSamples& s) {
  CsvTable table({"z_re", "z_im", "f_re", "f_im", "norm2"});
  for (int c = 0; c < mesh.class_count(); ++c) {
    const Complex z = mesh.class_point(c), f = s.f[static_cast<std::size_t>(c)];
    table.add({z.real(), z.imag(), f.real(), f.imag(), s.norm2[c]});
  }
  return table.str();
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace blaschke
