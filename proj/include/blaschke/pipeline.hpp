#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "blaschke/config.hpp"
#include "blaschke/covariance.hpp"
#include "blaschke/cubic_differential.hpp"
#include "blaschke/flow.hpp"
#include "blaschke/io.hpp"
#include "blaschke/spectral.hpp"
#include "blaschke/wang.hpp"

namespace blaschke {

inline Json module_versions() {
  return {{"fuchsian", "1.0.0"}, {"cubicdiff", "1.0.0"}, {"domain", "1.0.0"}, {"wang", "1.0.0"},
          {"spectral_covariance", "1.0.0"}, {"flow", "1.0.0"}, {"cli", "1.0.0"}};
}

/// One invariant check: value compared against limit by `relation`.
struct Check {
  std::string name;
  double value = 0.0;
  std::string relation;
  double limit = 0.0;

  [[nodiscard]] bool pass() const {
    if (!std::isfinite(value)) return false;
    if (relation == "<") return value < limit;
    if (relation == "<=") return value <= limit;
    if (relation == ">") return value > limit;
    if (relation == ">=") return value >= limit;
    return value == limit;
  }
  /// Positive when passing.
  [[nodiscard]] double margin() const {
    if (relation == "<" || relation == "<=") return limit - value;
    if (relation == ">" || relation == ">=") return value - limit;
    return -std::abs(value - limit);
  }
  [[nodiscard]] Json json() const {
    return {{"name", name}, {"pass", pass()}, {"value", value}, {"relation", relation}, {"limit", limit},
            {"margin", margin()}};
  }
};

struct Section {
  Json results = Json::object();
  std::vector<Check> checks;

  void check(std::string name, double value, std::string relation, double limit) {
    checks.push_back({std::move(name), value, std::move(relation), limit});
  }
  [[nodiscard]] bool ok() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass(); });
  }
  [[nodiscard]] Json json() const {
    Json cs = Json::array();
    for (const auto& c : checks) cs.push_back(c.json());
    return {{"results", results}, {"checks", cs}, {"status", ok() ? "pass" : "fail"}};
  }
  void absorb(const Section& other, const std::string& prefix, const std::string& key) {
    results[key] = other.results;
    for (auto c : other.checks) {
      c.name = prefix + c.name;
      checks.push_back(std::move(c));
    }
  }
};

/// Lazily built shared state for the commands of one run.
class Context {
public:
  explicit Context(RunConfig config, std::function<void(const std::string&)> log = {})
      : config_(std::move(config)), log_(std::move(log)), group_(octagon_group()) {
    validate(config_);
  }

  [[nodiscard]] const RunConfig& config() const { return config_; }
  [[nodiscard]] const FuchsianGroup& group() const { return group_; }
  std::map<std::string, double> timings;

  void log(const std::string& message) const {
    if (log_) log_(message);
  }

  template <class F>
  auto timed(const std::string& name, F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    log(name + " ...");
    auto out = f();
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    timings[name] += dt;
    log(name + " done in " + format_double(dt) + " s");
    return out;
  }

  const std::shared_ptr<const WordTable>& words() {
    if (!words_)
      words_ = timed("words", [&] {
        return std::make_shared<const WordTable>(enumerate_words(group_, std::max(config_.truncation, 4)));
      });
    return words_;
  }

  const CubicDifferential& q() {
    if (!q_) {
      q_ = timed("series", [&]() -> CubicDifferential {
        if (config_.seed_kind == "auto") return poincare_series_auto(group_, config_.truncation);
        if (config_.seed_kind == "zero")
          return CubicDifferential(SeedPolynomial{}, config_.truncation, words());
        return poincare_series(group_, config_.seed_coefficients, config_.truncation, words());
      });
    }
    return *q_;
  }

  const ConformalMesh& mesh() {
    if (!mesh_) mesh_ = timed("mesh", [&] { return build_octagon_mesh(group_, config_.h); });
    return *mesh_;
  }

  const LaplaceOperator& op() {
    if (!op_) op_ = assemble_laplacian(mesh());
    return *op_;
  }

  const DifferentialSamples& samples() {
    if (!samples_) samples_ = timed("sampling", [&] { return sample_differential(q(), mesh()); });
    return *samples_;
  }

  const ZeroSet& zeros() {
    if (!zeros_) zeros_ = timed("zeros", [&] { return find_zeros(q(), group_, mesh()); });
    return *zeros_;
  }

  const SpectralData& spectral() {
    if (!spectral_) spectral_ = timed("eigensolve", [&] { return eigensolve(op(), config_.k); });
    return *spectral_;
  }

  const FamilySweep& sweep(const std::string& name, const std::vector<double>& grid) {
    auto it = sweeps_.find(name);
    if (it == sweeps_.end())
      it = sweeps_.emplace(name, timed("sweep " + name, [&] { return sweep_family(mesh(), op(), samples().norm2, grid); }))
               .first;
    return it->second;
  }

  [[nodiscard]] bool q_nonzero() { return samples().norm2.maxCoeff() > 0.0; }

private:
  RunConfig config_;
  std::function<void(const std::string&)> log_;
  FuchsianGroup group_;
  std::shared_ptr<const WordTable> words_;
  std::optional<CubicDifferential> q_;
  std::optional<ConformalMesh> mesh_;
  std::optional<LaplaceOperator> op_;
  std::optional<DifferentialSamples> samples_;
  std::optional<ZeroSet> zeros_;
  std::optional<SpectralData> spectral_;
  std::map<std::string, FamilySweep> sweeps_;
};

/// Per-t table and every family invariant, recorded as checks.
inline Section sweep_section(Context& ctx, const FamilySweep& sweep) {
  Section s;
  const auto& mesh = ctx.mesh();
  const bool nonzero = ctx.q_nonzero();
  CsvTable table({"t", "u_min", "u_max", "area", "residual", "certificate", "envelope", "gauss_bonnet_defect",
                  "max_curvature_term", "udot_min", "udot_max", "iterations"});
  double residual = 0.0, certificate = 0.0, u_min = 1e300, over = -1e300, gb = 0.0, curvature = 0.0;
  double step = 1e300, area_step = 1e300, udot_min = 1e300, udot_spread = 1e300, u_abs = 0.0;
  for (std::size_t i = 0; i < sweep.points.size(); ++i) {
    const auto& p = sweep.points[i];
    const double defect = std::abs(p.total_curvature + 4.0 * std::numbers::pi) / (4.0 * std::numbers::pi);
    table.add({p.t, p.u_min, p.u_max, p.area, p.residual, p.certificate, p.envelope, defect, p.max_curvature_term,
               p.udot.minCoeff(), p.udot.maxCoeff(), static_cast<double>(p.iterations)});
    residual = std::max(residual, p.residual);
    certificate = std::max(certificate, p.certificate);
    u_min = std::min(u_min, p.u_min);
    over = std::max(over, p.u_max - p.envelope);
    gb = std::max(gb, defect);
    curvature = std::max(curvature, p.max_curvature_term);
    u_abs = std::max(u_abs, p.u.cwiseAbs().maxCoeff());
    if (p.t > 0.0) {
      udot_min = std::min(udot_min, p.udot.minCoeff());
      udot_spread = std::min(udot_spread, p.udot.maxCoeff() - p.udot.minCoeff());
    }
    if (i > 0) {
      step = std::min(step, (p.u - sweep.points[i - 1].u).minCoeff());
      area_step = std::min(area_step, p.area - sweep.points[i - 1].area);
    }
  }
  (void)mesh;
  s.results["table"] = table.str();
  s.results["points"] = sweep.points.size();
  s.check("newton_residual_max", residual, "<", 1e-10);
  s.check("residual_certificate_max", certificate, "<", 1e-9);
  s.check("envelope_lower_min_u", u_min, ">=", 0.0);
  s.check("envelope_upper_excess", over, "<=", 1e-8);
  s.check("gauss_bonnet_relative_defect", gb, "<", 5e-3);
  s.check("curvature_term_max", curvature, "<", 1.0);
  if (sweep.points.size() > 1) {
    s.check("monotonicity_min_step", step, ">=", -1e-8);
    s.check("area_min_step", area_step, ">=", 0.0);
  }
  if (nonzero) {
    if (udot_min < 1e299) s.check("udot_min", udot_min, ">", 0.0);
    if (udot_spread < 1e299) s.check("udot_spread_min", udot_spread, ">", 0.0);
  } else {
    s.check("zero_q_u_sup", u_abs, "==", 0.0);
  }
  return s;
}

inline Section run_solve(Context& ctx) {
  Section s;
  const auto& cfg = ctx.config();
  const auto& op = ctx.op();
  const auto& norm2 = ctx.samples().norm2;
  const auto baseline = ctx.timed("baseline", [&] { return solve_wang(op, norm2, 0.0, ScalarField::Zero(op.size())); });
  s.results["baseline_u_sup"] = baseline.u.cwiseAbs().maxCoeff();
  s.check("hyperbolic_baseline_u_sup", baseline.u.cwiseAbs().maxCoeff(), "<", 1e-8);
  const ScalarField udot_newton = solve_udot(op, norm2, 0.0, ScalarField::Zero(op.size()));
  const ScalarField udot_cg = solve_hyperbolic_derivative(op, norm2);
  const double scale = std::max(udot_cg.cwiseAbs().maxCoeff(), 1e-300);
  const double agree = (udot_newton - udot_cg).cwiseAbs().maxCoeff() / scale;
  s.results["udot0_two_solve_relative_difference"] = agree;
  s.check("udot0_two_solve_agreement", agree, "<", 1e-9);

  const auto grid = cfg.solve_grid.points();
  const auto& sweep = ctx.sweep("solve", grid);
  Section sw = sweep_section(ctx, sweep);
  s.absorb(sw, "", "sweep");
  s.results["mesh"] = {{"classes", ctx.mesh().class_count()},
                       {"raw_vertices", ctx.mesh().vertices.size()},
                       {"triangles", ctx.mesh().triangles.size()},
                       {"euler_characteristic", euler_characteristic(ctx.mesh())},
                       {"total_mass", ctx.mesh().total_mass()},
                       {"max_offdiagonal", max_offdiagonal(op.stiffness)}};
  s.results["q_norm2"] = ctx.mesh().mass.dot(norm2);
  s.results["q_pointwise_max"] = norm2.maxCoeff();
  return s;
}

inline Section run_flat_limit(Context& ctx) {
  Section s;
  const auto& cfg = ctx.config();
  if (!ctx.q_nonzero()) throw ConfigError("flat-limit: the flat limit needs a nonzero differential");
  const auto& zeros = ctx.zeros();
  Json zj = Json::array();
  for (std::size_t i = 0; i < zeros.points.size(); ++i)
    zj.push_back({{"z", complex_json(zeros.points[i])}, {"multiplicity", zeros.multiplicity[i]}});
  s.results["zeros"] = zj;
  s.results["zero_count"] = zeros.total;
  // deg K = 2g - 2 = 2, so a cubic differential has 3 deg K = 6 zeros.
  s.check("zero_count", zeros.total, "==", 6.0);
  std::vector<double> grid{0.0};
  grid.insert(grid.end(), cfg.flat_t.begin(), cfg.flat_t.end());
  const auto& sweep = ctx.sweep("flat", grid);
  const auto keep = zero_free_classes(ctx.mesh(), ctx.group(), zeros.points, cfg.exclusion_radius);
  const auto rows = flat_limit_report(ctx.mesh(), sweep, ctx.samples().f, keep);
  CsvTable table({"t", "sup_relative_error", "vertices_used"});
  double worst_step = -1e300;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    table.add({rows[i].t, rows[i].sup_error, static_cast<double>(rows[i].vertices_used)});
    if (i > 0) worst_step = std::max(worst_step, rows[i].sup_error - rows[i - 1].sup_error);
  }
  s.results["table"] = table.str();
  Json ej = Json::array();
  for (const auto& r : rows) ej.push_back(r.sup_error);
  s.results["sup_errors"] = ej;
  s.results["classes_used"] = keep.size();
  if (rows.size() > 1) s.check("flat_error_max_increment", worst_step, "<", 0.0);
  s.check("flat_error_last", rows.back().sup_error, "<", 0.1);
  Section sw = sweep_section(ctx, sweep);
  s.absorb(sw, "sweep.", "sweep");
  return s;
}

/// The tail column is written only when a covariance tail estimate is supplied.
inline Section run_length(Context& ctx, std::optional<double> tail = std::nullopt) {
  Section s;
  const auto& cfg = ctx.config();
  const auto grid = cfg.length_grid.points();
  const auto& sweep = ctx.sweep("length", grid);
  const auto mean = mean_term_along_family(sweep, ctx.mesh().mass);
  const auto table = length_lower_bound(grid, mean);
  const auto area = area_bound(sweep);
  std::vector<std::string> header{"t", "mean_term", "length", "fitted_slope", "t_times_mean_term", "fitted_length"};
  if (tail) header.push_back("tail_estimate");
  CsvTable csv(header);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    std::vector<double> row{grid[i], mean[i], table.length[i], table.slope, grid[i] * mean[i],
                            grid[i] > 0.0 ? table.slope * std::log(grid[i]) + table.intercept : 0.0};
    if (tail) row.push_back(*tail);
    csv.add(row);
  }
  s.results["table"] = csv.str();
  s.results["slope"] = table.slope;
  s.results["intercept"] = table.intercept;
  s.results["fit_residual"] = table.fit_residual;
  s.results["fit_points"] = table.fit_points;
  s.results["decay_floor"] = table.decay_floor;
  s.results["length_at_end"] = table.length.back();
  s.results["area_bound_constant"] = area.constant;
  s.results["area_bound_spread"] = area.spread;
  const double q2 = ctx.mesh().mass.dot(ctx.samples().norm2);
  s.results["mean_term_t0"] = mean.front();
  s.results["mean_term_t0_expected"] = q2 / (2.0 * std::numbers::pi);
  if (ctx.q_nonzero()) {
    double positive = 1e300;
    for (std::size_t i = 0; i < grid.size(); ++i) positive = std::min(positive, mean[i]);
    s.check("mean_term_min", positive, ">", 0.0);
    s.check("decay_floor_last_decade", table.decay_floor, ">", 0.0);
    s.check("fitted_slope", table.slope, ">", 0.0);
    s.check("fit_residual_over_slope", table.fit_residual / table.slope, "<", 0.1);
    s.check("mean_term_t0_relative_error",
            std::abs(mean.front() - q2 / (2.0 * std::numbers::pi)) / (q2 / (2.0 * std::numbers::pi)), "<", 1e-3);
  } else {
    s.check("zero_q_length_end", table.length.back(), "==", 0.0);
  }
  Section sw = sweep_section(ctx, sweep);
  s.absorb(sw, "sweep.", "sweep");
  return s;
}

/// Flow variance of the first nonconstant eigenfunctions against the spectral
/// multiplier. The reported predictions use the probability normalization
/// ||phi||^2 = 1/Area of the M-orthonormal modes.
inline Section run_variance_mc(Context& ctx) {
  Section s;
  const auto& cfg = ctx.config();
  const auto& spec = ctx.spectral();
  std::vector<ScalarField> fields;
  for (int j = 1; j <= cfg.mc_modes; ++j) fields.push_back(spec.modes.col(j));
  McOptions mo;
  mo.horizon = cfg.mc_horizon;
  mo.samples = cfg.mc_samples;
  mo.step = cfg.mc_step;
  mo.seed = cfg.seed;
  mo.threads = cfg.threads;
  const auto est = ctx.timed("variance-mc", [&] { return variance_mc(ctx.mesh(), ctx.group(), fields, mo); });
  Json runs = Json::array();
  for (int j = 1; j <= cfg.mc_modes; ++j) {
    const auto& e = est[static_cast<std::size_t>(j - 1)];
    const double lambda = spec.eigenvalues[j];
    const double ratio = gamma_ratio(lambda);
    const double norm_prob = 1.0 / spec.area;
    const double predicted = 4.0 * ratio * norm_prob;
    const double z = (e.estimate - predicted) / e.standard_error;
    const double z_single = (e.estimate - ratio * norm_prob) / e.standard_error;
    runs.push_back({{"f_id", "phi_" + std::to_string(j)},
                    {"eigenvalue", lambda},
                    {"T", cfg.mc_horizon},
                    {"n", cfg.mc_samples},
                    {"seed", cfg.seed},
                    {"estimate", e.estimate},
                    {"stderr", e.standard_error},
                    {"spectral_prediction", predicted},
                    {"z_score", z},
                    {"estimate_over_prediction", e.estimate / predicted},
                    {"prediction_without_factor_4", ratio * norm_prob},
                    {"z_score_without_factor_4", z_single}});
    s.check("mc_vs_spectral_sigma_phi_" + std::to_string(j), std::abs(z), "<=", 3.0);
  }
  s.results["runs"] = runs;
  return s;
}

inline Section run_covariance(Context& ctx, bool with_length = true, bool with_mc = true) {
  Section s;
  const auto& cfg = ctx.config();
  const auto& op = ctx.op();
  const auto& norm2 = ctx.samples().norm2;
  const auto& spec = ctx.spectral();
  s.results["spectrum"] = {{"k", spec.k()},
                           {"lambda_1", spec.eigenvalues[1]},
                           {"lambda_k", spec.eigenvalues[spec.k()]},
                           {"max_residual", spec.max_residual},
                           {"orthonormality_defect", spec.orthonormality_defect},
                           {"basis_size", spec.basis_size}};
  s.check("eigen_residual_max", spec.max_residual, "<", 1e-8);
  s.check("eigen_orthonormality_defect", spec.orthonormality_defect, "<", 1e-8);
  s.check("eigen_lambda0", std::abs(spec.eigenvalues[0]), "<", 1e-9);

  const auto report = fiber_norm(op, norm2, spec);
  const auto half = fiber_norm(op, norm2, spec, std::max(1, cfg.k / 2));
  s.results["fiber"] = {{"variance", report.variance},     {"mean", report.mean},
                        {"total", report.total},           {"k", report.k},
                        {"tail", report.tail},             {"truncation_warning", report.truncation_warning},
                        {"q_norm2", report.q_norm2},       {"parseval_gap", report.parseval_gap},
                        {"total_half_k", half.total},      {"tail_half_k", half.tail}};
  CsvTable modes({"j", "lambda", "gamma_ratio", "contribution", "cumulative"});
  double cumulative = 0.0;
  for (int j = 1; j <= report.k; ++j) {
    cumulative += report.contributions[static_cast<std::size_t>(j - 1)];
    modes.add({static_cast<double>(j), spec.eigenvalues[j], gamma_ratio(spec.eigenvalues[j]),
               report.contributions[static_cast<std::size_t>(j - 1)], cumulative});
  }
  s.results["modes_table"] = modes.str();
  s.check("truncation_agreement_excess", std::abs(report.total - half.total) - (report.tail + half.tail), "<=", 0.0);
  if (ctx.q_nonzero()) {
    s.check("lower_bound_variance_minus_tail", report.variance - report.tail, ">", 0.0);
    s.check("tail_positive", report.tail, ">", 0.0);
    s.check("tail_below_5_percent_of_variance", report.tail / report.variance, "<=", 0.05);
    const auto scaled = fiber_norm(op, ScalarField(4.0 * norm2), spec);
    const double scaling = std::abs(scaled.total / report.total - 16.0) / 16.0;
    s.results["scaling_relative_error"] = scaling;
    s.check("quartic_scaling_relative_error", scaling, "<", 1e-8);
    const auto rotated = sample_differential(ctx.q().scaled(std::polar(1.0, 2.0 * std::numbers::pi * 0.3)), ctx.mesh());
    const auto rot = fiber_norm(op, rotated.norm2, spec);
    const double s1 = std::abs(rot.total - report.total) / report.total;
    s.results["circle_action_relative_difference"] = s1;
    s.check("circle_action_relative_difference", s1, "<", 1e-12);
    const ScalarField udot0 = solve_udot(op, norm2, 0.0, ScalarField::Zero(op.size()));
    const double mean0 = ctx.mesh().mass.dot(udot0) / ctx.mesh().total_mass();
    const double expected = report.q_norm2 / (2.0 * std::numbers::pi);
    s.results["mean_term_t0"] = mean0;
    s.results["mean_term_t0_expected"] = expected;
    s.check("mean_term_t0_relative_error", std::abs(mean0 - expected) / expected, "<", 1e-3);
  } else {
    s.check("zero_q_total", report.total, "==", 0.0);
  }
  if (with_length) s.absorb(run_length(ctx, report.tail), "length.", "length");
  if (with_mc) s.absorb(run_variance_mc(ctx), "mc.", "mc");
  return s;
}

/// Closed geodesics of word length in [1, max_word], one per inverse pair,
/// drawn in a seeded order.
inline std::vector<MoebiusTransform> pick_geodesics(const WordTable& words, int max_word, int count,
                                                    std::mt19937_64& rng) {
  std::vector<std::size_t> candidates;
  for (std::size_t i = words.level_offsets[1]; i < words.level_offsets[static_cast<std::size_t>(max_word) + 1]; ++i)
    candidates.push_back(i);
  std::shuffle(candidates.begin(), candidates.end(), rng);
  std::vector<MoebiusTransform> out;
  for (std::size_t i : candidates) {
    const auto& g = words.elements[i];
    bool fresh = true;
    for (const auto& h : out) fresh = fresh && h.distance(g.inverse()) > 1e-8;
    if (fresh) out.push_back(g);
    if (static_cast<int>(out.size()) == count) break;
  }
  if (static_cast<int>(out.size()) < count) throw ConfigError("xray: not enough distinct closed geodesics");
  return out;
}

inline Section run_xray(Context& ctx) {
  Section s;
  const auto& cfg = ctx.config();
  const auto& spec = ctx.spectral();
  const auto& mesh = ctx.mesh();
  std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32), 0x58u};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> normal;
  const auto geodesics = pick_geodesics(*ctx.words(), cfg.xray_max_word, cfg.xray_geodesics, rng);
  CsvTable table({"form", "geodesic", "length", "abs_integral", "chi_sup", "relative"});
  double worst = 0.0;
  ctx.timed("xray", [&] {
    for (int f = 0; f < cfg.xray_forms; ++f) {
      ScalarField field = ScalarField::Zero(mesh.class_count());
      for (int j = 1; j <= cfg.xray_modes; ++j) field += normal(rng) * spec.modes.col(j);
      const auto smooth = std::make_shared<const SmoothField>(mesh, ctx.group(), *ctx.words(), field, cfg.xray_radius);
      const auto chi = exact_form(smooth);
      const double sup = sup_norm(mesh, chi);
      for (std::size_t g = 0; g < geodesics.size(); ++g) {
        const double value = xray_check(ctx.group(), chi, geodesics[g], cfg.xray_points);
        table.add({static_cast<double>(f), static_cast<double>(g), axis_data(geodesics[g]).translation_length, value,
                   sup, value / sup});
        worst = std::max(worst, value / sup);
      }
    }
    return 0;
  });
  // Control: the non-potential tensor (|q|^2_sigma / max) sigma, or sigma itself for q = 0.
  const auto& norm2 = ctx.samples().norm2;
  const double top = norm2.maxCoeff();
  const ScalarField control = top > 0.0 ? ScalarField(norm2 / top) : ScalarField(ScalarField::Ones(norm2.size()));
  double control_sum = 0.0;
  Json control_values = Json::array();
  for (const auto& g : geodesics) {
    const double value = std::abs(closed_geodesic_integral(
        ctx.group(), g, cfg.xray_points, [&](const TangentState& st) { return mesh.interpolate(control, st.point); }));
    control_values.push_back(value);
    control_sum += value;
  }
  const double floor = 1e-3;
  const double contrast = control_sum / static_cast<double>(geodesics.size()) / floor;
  s.results["table"] = table.str();
  s.results["potential_worst_relative"] = worst;
  s.results["control_integrals"] = control_values;
  s.results["control_contrast"] = contrast;
  s.check("potential_relative_max", worst, "<", 1e-3);
  s.check("control_contrast_over_floor", contrast, ">=", 10.0);
  return s;
}

/// Top-level JSON for one command.
inline Json summary_json(Context& ctx, const std::string& command, const std::map<std::string, Section>& sections,
                         const std::vector<std::string>& order) {
  Json j = {{"command", command},
            {"config_hash", config_hash(ctx.config())},
            {"versions", module_versions()},
            {"config", to_json(ctx.config())}};
  Json secs = Json::object();
  bool ok = true;
  for (const auto& name : order) {
    const auto& sec = sections.at(name);
    secs[name] = sec.json();
    ok = ok && sec.ok();
  }
  j["sections"] = secs;
  j["status"] = ok ? "pass" : "fail";
  return j;
}

}  // namespace blaschke
