#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>
#include <unistd.h>

#include "CLI11.hpp"

#include "blaschke/pipeline.hpp"

#ifndef BLASCHKE_CLI_PATH
#define BLASCHKE_CLI_PATH "blaschke"
#endif

namespace fs = std::filesystem;
using namespace blaschke;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void need(const Section& s, const std::string& check) {
    for (const auto& c : s.checks) {
      if (c.name != check) continue;
      pass = pass && c.pass();
      add(check + " = " + format_double(c.value) + " (" + c.relation + " " + format_double(c.limit) + ")");
      return;
    }
    pass = false;
    add(check + " missing");
  }
  void need(bool ok, const std::string& text) {
    pass = pass && ok;
    add(text);
  }
  void add(const std::string& text) { detail += (detail.empty() ? "" : "; ") + text; }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Outcome criterion(int id, Context& ctx) {
  Outcome o;
  const auto& cfg = ctx.config();
  switch (id) {
    case 1: {
      const auto t0 = std::chrono::steady_clock::now();
      Context fresh(cfg);
      const auto& op = fresh.op();
      const auto hyperbolic = solve_wang(op, fresh.samples().norm2, 0.0, ScalarField::Zero(op.size()));
      const auto flat_q = solve_wang(op, ScalarField::Zero(op.size()), 1.0, ScalarField::Zero(op.size()));
      const double runtime = seconds_since(t0);
      const double u0 = hyperbolic.u.cwiseAbs().maxCoeff(), uq = flat_q.u.cwiseAbs().maxCoeff();
      o.need(u0 < 1e-8, "sup|u| at t = 0 is " + format_double(u0));
      o.need(uq < 1e-8, "sup|u| for q = 0 is " + format_double(uq));
      o.need(runtime < 10.0, "runtime " + format_double(runtime) + " s with " + std::to_string(op.size()) + " classes");
      break;
    }
    case 2:
    case 3: {
      const auto& sweep = ctx.sweep("solve", cfg.solve_grid.points());
      const Section s = sweep_section(ctx, sweep);
      if (id == 2) {
        o.need(sweep.points.back().t >= 1e4, "grid reaches t = " + format_double(sweep.points.back().t));
        o.need(s, "gauss_bonnet_relative_defect");
      } else {
        o.need(s, "envelope_lower_min_u");
        o.need(s, "envelope_upper_excess");
        o.need(s, "monotonicity_min_step");
      }
      break;
    }
    case 4: {
      const Section s = run_flat_limit(ctx);
      o.add("sup errors " + s.results["sup_errors"].dump());
      o.need(s, "flat_error_max_increment");
      o.need(s, "flat_error_last");
      break;
    }
    case 5: {
      const Section s = run_covariance(ctx, false, false);
      o.need(s, "lower_bound_variance_minus_tail");
      o.need(s, "tail_positive");
      o.need(s, "quartic_scaling_relative_error");
      break;
    }
    case 6: {
      const auto& op = ctx.op();
      const auto& norm2 = ctx.samples().norm2;
      const ScalarField direct = solve_udot(op, norm2, 0.0, ScalarField::Zero(op.size()));
      const ScalarField cg = solve_hyperbolic_derivative(op, norm2);
      const double area = ctx.mesh().total_mass();
      const double expected = op.mass.dot(norm2) / (2.0 * std::numbers::pi);
      const double m1 = op.mass.dot(direct) / area, m2 = op.mass.dot(cg) / area;
      const double e1 = std::abs(m1 - expected) / expected, e2 = std::abs(m2 - expected) / expected;
      o.need(e1 < 1e-3, "direct solve relative error " + format_double(e1));
      o.need(e2 < 1e-3, "conjugate gradient relative error " + format_double(e2));
      break;
    }
    case 7: {
      const auto t0 = std::chrono::steady_clock::now();
      const Section s = run_length(ctx);
      const double runtime = seconds_since(t0);
      o.need(s, "decay_floor_last_decade");
      o.need(s, "fitted_slope");
      o.need(s, "fit_residual_over_slope");
      o.need(runtime < 600.0, "runtime " + format_double(runtime) + " s");
      break;
    }
    case 8: {
      const Section s = run_variance_mc(ctx);
      for (const auto& r : s.results["runs"])
        o.add(r["f_id"].get<std::string>() + " estimate " + format_double(r["estimate"].get<double>()) + " +- " +
              format_double(r["stderr"].get<double>()) + " vs " +
              format_double(r["spectral_prediction"].get<double>()));
      for (int j = 1; j <= 3; ++j) o.need(s, "mc_vs_spectral_sigma_phi_" + std::to_string(j));
      break;
    }
    case 9: {
      const Section s = run_xray(ctx);
      o.need(s, "potential_relative_max");
      o.need(s, "control_contrast_over_floor");
      break;
    }
    case 10: {
      const fs::path base = fs::temp_directory_path() / ("blaschke_determinism_" + std::to_string(::getpid()));
      std::string texts[2];
      for (int run = 0; run < 2; ++run) {
        const fs::path dir = base / std::to_string(run);
        fs::remove_all(dir);
        const std::string cmd = std::string("\"") + BLASCHKE_CLI_PATH + "\" all --out \"" + dir.string() +
                                "\" --seed " + std::to_string(cfg.seed) + " > /dev/null 2>&1";
        const int status = std::system(cmd.c_str());
        o.add("run " + std::to_string(run + 1) + " exit status " + std::to_string(WEXITSTATUS(status)));
        texts[run] = slurp(dir / "all.json");
      }
      o.need(!texts[0].empty(), "summary size " + std::to_string(texts[0].size()) + " bytes");
      o.need(texts[0] == texts[1], texts[0] == texts[1] ? "summaries byte-identical" : "summaries differ");
      fs::remove_all(base);
      break;
    }
    default:
      throw ConfigError("unknown criterion " + std::to_string(id));
  }
  return o;
}

const char* kTitles[] = {"",
                         "hyperbolic baseline",
                         "Gauss-Bonnet across the family",
                         "envelope and monotonicity",
                         "flat limit",
                         "fiber lower bound and quartic scaling",
                         "mean-term closed form",
                         "logarithmic length divergence",
                         "Monte Carlo against spectral prediction",
                         "X-ray vanishing on potentials",
                         "determinism of cli all"};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria runner"};
  std::vector<int> only;
  app.add_option("--criterion", only, "run only these criteria (1-10)")->check(CLI::Range(1, 10));
  CLI11_PARSE(app, argc, argv);
  if (only.empty())
    for (int i = 1; i <= 10; ++i) only.push_back(i);

  Context ctx(RunConfig{});
  int failed = 0;
  for (int id : only) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criterion(id, ctx);
    } catch (const std::exception& e) {
      o.pass = false;
      o.add(std::string("error: ") + e.what());
    }
    if (!o.pass) ++failed;
    std::printf("%s criterion %d (%s): %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", id, kTitles[id], o.detail.c_str(),
                seconds_since(t0));
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
