#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "blaschke/cubic_differential.hpp"
#include "blaschke/error.hpp"
#include "blaschke/io.hpp"
#include "blaschke/wang.hpp"

namespace blaschke {

/// Either an explicit list of t values or a log grid.
struct GridSpec {
  double start = 1e-2;
  double stop = 1e4;
  int count = 20;
  bool include_zero = true;
  std::vector<double> values;

  [[nodiscard]] std::vector<double> points() const {
    if (!values.empty()) return values;
    return log_grid(start, stop, count, include_zero);
  }
};

struct RunConfig {
  double h = 0.07;
  int truncation = 6;
  /// "generic", "auto", "zero" or "custom" (uses seed_coefficients).
  std::string seed_kind = "generic";
  SeedPolynomial seed_coefficients{Complex(1.0, 0.0), Complex(0.5, 0.3), Complex(-0.4, 0.2)};
  GridSpec solve_grid{1e-2, 1e4, 20, true, {}};
  GridSpec length_grid{1e-2, 1e6, 41, true, {}};
  std::vector<double> flat_t{1e2, 1e3, 1e4, 1e5};
  double exclusion_radius = 0.2;
  int k = 200;
  double mc_horizon = 50.0;
  int mc_samples = 2000;
  double mc_step = 0.02;
  int mc_modes = 3;
  int xray_forms = 5;
  int xray_geodesics = 10;
  int xray_max_word = 3;
  int xray_points = 2048;
  int xray_modes = 10;
  double xray_radius = 0.25;
  std::uint64_t seed = 1;
  int threads = 0;
  std::string output = "out";
};

inline SeedPolynomial generic_seed() { return RunConfig{}.seed_coefficients; }

namespace detail {

inline void validate_grid(const std::vector<double>& t, const std::string& name) {
  if (t.empty()) throw ConfigError(name + ": empty t grid");
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!(t[i] >= 0.0) || !std::isfinite(t[i])) throw ConfigError(name + ": t values must be finite and >= 0");
    if (i > 0 && !(t[i] > t[i - 1])) throw ConfigError(name + ": t grid must be strictly increasing");
  }
}

inline void validate_spec(const GridSpec& g, const std::string& name) {
  if (g.values.empty()) {
    if (!(g.start > 0.0) || !(g.stop > g.start) || g.count < 2)
      throw ConfigError(name + ": log grid needs 0 < start < stop and count >= 2");
  }
  validate_grid(g.points(), name);
}

}  // namespace detail

inline void validate(const RunConfig& c) {
  const auto positive = [](double x, const char* what) {
    if (!(x > 0.0) || !std::isfinite(x)) throw ConfigError(std::string(what) + " must be positive");
  };
  positive(c.h, "mesh.h");
  if (c.h > 2.0) throw ConfigError("mesh.h must not exceed 2");
  if (c.truncation < 1 || c.truncation > 7) throw ConfigError("series.truncation must lie in [1, 7]");
  static const std::set<std::string> kinds{"generic", "auto", "zero", "custom"};
  if (!kinds.count(c.seed_kind)) throw ConfigError("series.seed must be generic, auto, zero or a coefficient list");
  detail::validate_spec(c.solve_grid, "grids.solve");
  detail::validate_spec(c.length_grid, "grids.length");
  detail::validate_grid(c.flat_t, "flat_limit.t");
  if (c.flat_t.front() <= 0.0) throw ConfigError("flat_limit.t values must be positive");
  positive(c.exclusion_radius, "flat_limit.exclusion_radius");
  if (c.k < 1) throw ConfigError("spectral.k must be at least 1");
  positive(c.mc_horizon, "mc.T");
  if (c.mc_samples < 2) throw ConfigError("mc.n must be at least 2");
  positive(c.mc_step, "mc.dt");
  if (c.mc_step > 0.05) throw ConfigError("mc.dt must not exceed 0.05");
  if (c.mc_modes < 1 || c.mc_modes > c.k) throw ConfigError("mc.modes must lie in [1, spectral.k]");
  if (c.xray_forms < 1 || c.xray_geodesics < 1) throw ConfigError("xray.forms and xray.geodesics must be positive");
  if (c.xray_max_word < 1 || c.xray_max_word > 4) throw ConfigError("xray.max_word must lie in [1, 4]");
  if (c.xray_points < 8) throw ConfigError("xray.points must be at least 8");
  if (c.xray_modes < 1 || c.xray_modes > c.k) throw ConfigError("xray.modes must lie in [1, spectral.k]");
  positive(c.xray_radius, "xray.radius");
  if (c.threads < 0) throw ConfigError("threads must be >= 0");
}

inline Json grid_json(const GridSpec& g) {
  if (!g.values.empty()) return {{"values", g.values}};
  return {{"start", g.start}, {"stop", g.stop}, {"count", g.count}, {"include_zero", g.include_zero}};
}

/// Effective numerical configuration; the output directory and thread count
/// are excluded because they do not change any emitted number.
inline Json to_json(const RunConfig& c) {
  Json seed;
  if (c.seed_kind == "custom" || c.seed_kind == "generic") {
    seed = Json::array();
    for (Complex s : c.seed_coefficients) seed.push_back(complex_json(s));
  } else {
    seed = c.seed_kind;
  }
  return {{"mesh", {{"h", c.h}}},
          {"series", {{"truncation", c.truncation}, {"seed_kind", c.seed_kind}, {"seed", seed}}},
          {"grids", {{"solve", grid_json(c.solve_grid)}, {"length", grid_json(c.length_grid)}}},
          {"flat_limit", {{"t", c.flat_t}, {"exclusion_radius", c.exclusion_radius}}},
          {"spectral", {{"k", c.k}}},
          {"mc", {{"T", c.mc_horizon}, {"n", c.mc_samples}, {"dt", c.mc_step}, {"modes", c.mc_modes}}},
          {"xray",
           {{"forms", c.xray_forms},
            {"geodesics", c.xray_geodesics},
            {"max_word", c.xray_max_word},
            {"points", c.xray_points},
            {"modes", c.xray_modes},
            {"radius", c.xray_radius}}},
          {"seed", c.seed}};
}

inline std::string config_hash(const RunConfig& c) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(dump_json(to_json(c)))));
  return buf;
}

namespace detail {

inline void reject_unknown(const Json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) throw ConfigError("unknown key '" + it.key() + "' in " + where);
}

template <class T>
void read(const Json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(where + "." + key + " has the wrong type");
  }
}

inline GridSpec read_grid(const Json& j, GridSpec g, const std::string& where) {
  reject_unknown(j, {"start", "stop", "count", "include_zero", "values"}, where);
  read(j, "start", g.start, where);
  read(j, "stop", g.stop, where);
  read(j, "count", g.count, where);
  read(j, "include_zero", g.include_zero, where);
  read(j, "values", g.values, where);
  return g;
}

inline Complex read_complex(const Json& j, const std::string& where) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return {j[0].get<double>(), j[1].get<double>()};
  throw ConfigError(where + ": coefficient must be a number or [re, im]");
}

}  // namespace detail

inline RunConfig parse_config(const Json& j) {
  using detail::read;
  RunConfig c;
  detail::reject_unknown(j, {"mesh", "series", "grids", "flat_limit", "spectral", "mc", "xray", "seed", "threads", "output"},
                         "config");
  if (j.contains("mesh")) {
    detail::reject_unknown(j["mesh"], {"h"}, "mesh");
    read(j["mesh"], "h", c.h, "mesh");
  }
  if (j.contains("series")) {
    const Json& s = j["series"];
    detail::reject_unknown(s, {"truncation", "seed", "seed_kind"}, "series");
    read(s, "truncation", c.truncation, "series");
    if (s.contains("seed")) {
      const Json& seed = s["seed"];
      if (seed.is_string()) {
        c.seed_kind = seed.get<std::string>();
        if (c.seed_kind == "custom") throw ConfigError("series.seed: give the coefficients as a list");
      } else if (seed.is_array() && seed.size() >= 1 && seed.size() <= 3) {
        c.seed_kind = "custom";
        c.seed_coefficients = {};
        for (std::size_t i = 0; i < seed.size(); ++i)
          c.seed_coefficients[i] = detail::read_complex(seed[i], "series.seed");
      } else {
        throw ConfigError("series.seed must be a string or a list of 1 to 3 coefficients");
      }
    }
  }
  if (j.contains("grids")) {
    detail::reject_unknown(j["grids"], {"solve", "length"}, "grids");
    if (j["grids"].contains("solve")) c.solve_grid = detail::read_grid(j["grids"]["solve"], c.solve_grid, "grids.solve");
    if (j["grids"].contains("length"))
      c.length_grid = detail::read_grid(j["grids"]["length"], c.length_grid, "grids.length");
  }
  if (j.contains("flat_limit")) {
    detail::reject_unknown(j["flat_limit"], {"t", "exclusion_radius"}, "flat_limit");
    read(j["flat_limit"], "t", c.flat_t, "flat_limit");
    read(j["flat_limit"], "exclusion_radius", c.exclusion_radius, "flat_limit");
  }
  if (j.contains("spectral")) {
    detail::reject_unknown(j["spectral"], {"k"}, "spectral");
    read(j["spectral"], "k", c.k, "spectral");
  }
  if (j.contains("mc")) {
    const Json& m = j["mc"];
    detail::reject_unknown(m, {"T", "n", "dt", "modes"}, "mc");
    read(m, "T", c.mc_horizon, "mc");
    read(m, "n", c.mc_samples, "mc");
    read(m, "dt", c.mc_step, "mc");
    read(m, "modes", c.mc_modes, "mc");
  }
  if (j.contains("xray")) {
    const Json& x = j["xray"];
    detail::reject_unknown(x, {"forms", "geodesics", "max_word", "points", "modes", "radius"}, "xray");
    read(x, "forms", c.xray_forms, "xray");
    read(x, "geodesics", c.xray_geodesics, "xray");
    read(x, "max_word", c.xray_max_word, "xray");
    read(x, "points", c.xray_points, "xray");
    read(x, "modes", c.xray_modes, "xray");
    read(x, "radius", c.xray_radius, "xray");
  }
  read(j, "seed", c.seed, "config");
  read(j, "threads", c.threads, "config");
  read(j, "output", c.output, "config");
  validate(c);
  return c;
}

inline RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_config(j);
}

}  // namespace blaschke
