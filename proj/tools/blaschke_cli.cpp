#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "blaschke/pipeline.hpp"

namespace fs = std::filesystem;
using namespace blaschke;

namespace {

enum ExitCode { kOk = 0, kInvariant = 1, kConfig = 2, kNumerical = 3 };

/// Moves every "...table" string out of the results into its own CSV file.
void export_tables(Json& node, const fs::path& dir, const std::string& stem) {
  if (!node.is_object()) return;
  for (auto it = node.begin(); it != node.end(); ++it) {
    const std::string name = stem + "_" + it.key();
    if (it.value().is_string() && it.key().size() >= 5 && it.key().ends_with("table")) {
      const std::string file = name + ".csv";
      write_text(dir / file, it.value().get<std::string>());
      it.value() = file;
    } else if (it.value().is_object()) {
      export_tables(it.value(), dir, name);
    }
  }
}

std::map<std::string, Section> run(Context& ctx, const std::string& command, std::vector<std::string>& order) {
  std::map<std::string, Section> out;
  const auto add = [&](const std::string& name, auto&& fn) {
    out.emplace(name, fn());
    order.push_back(name);
  };
  if (command == "solve" || command == "all") add("solve", [&] { return run_solve(ctx); });
  if (command == "flat-limit" || command == "all") add("flat-limit", [&] { return run_flat_limit(ctx); });
  if (command == "length") add("length", [&] { return run_length(ctx); });
  if (command == "variance-mc") add("variance-mc", [&] { return run_variance_mc(ctx); });
  if (command == "covariance" || command == "all") add("covariance", [&] { return run_covariance(ctx); });
  if (command == "xray" || command == "all") add("xray", [&] { return run_xray(ctx); });
  return out;
}

int execute(const std::string& command, const std::string& config_path, const std::string& out_dir,
            const std::optional<std::uint64_t>& seed, const std::optional<int>& threads, bool verbose) {
  RunConfig config = config_path.empty() ? RunConfig{} : load_config(config_path);
  if (seed) config.seed = *seed;
  if (threads) config.threads = *threads;
  if (!out_dir.empty()) config.output = out_dir;
  validate(config);

  Context ctx(config, [verbose](const std::string& m) {
    if (verbose) std::cerr << "[blaschke] " << m << "\n";
  });
  std::vector<std::string> order;
  const auto sections = run(ctx, command, order);

  const fs::path dir = config.output;
  Json summary = summary_json(ctx, command, sections, order);
  for (const auto& name : order) export_tables(summary["sections"][name]["results"], dir, name);
  write_text(dir / (command + ".json"), dump_json(summary));
  if (command == "solve" || command == "all") {
    write_text(dir / "group.json", dump_json(group_json(ctx.group())));
    write_text(dir / "mesh.json", dump_json(mesh_json(ctx.mesh())));
    write_text(dir / "samples.csv", samples_csv(ctx.mesh(), ctx.samples()));
  }
  Json timings = Json::object();
  for (const auto& [name, seconds] : ctx.timings) timings[name] = seconds;
  write_text(dir / (command + ".timings.json"), dump_json(timings));

  bool ok = true;
  for (const auto& name : order) {
    for (const auto& c : sections.at(name).checks) {
      if (!c.pass()) {
        ok = false;
        std::cerr << "invariant failed: " << name << "." << c.name << " value " << format_double(c.value) << " "
                  << c.relation << " " << format_double(c.limit) << " does not hold\n";
      } else if (verbose) {
        std::cerr << "ok: " << name << "." << c.name << " margin " << format_double(c.margin()) << "\n";
      }
    }
  }
  std::cout << command << ": " << (ok ? "pass" : "fail") << " (" << (dir / (command + ".json")).string() << ")\n";
  return ok ? kOk : kInvariant;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Blaschke metrics on the Bolza surface: Wang family, covariance metric and geodesic flow checks"};
  app.require_subcommand(1, 1);
  std::string config_path, out_dir;
  std::uint64_t seed_value = 0;
  int threads_value = 0;
  bool verbose = false;
  auto* seed_opt = app.add_option("--seed", seed_value, "RNG seed (overrides the config)");
  auto* threads_opt = app.add_option("--threads", threads_value, "worker threads, 0 for hardware concurrency");
  app.add_option("--config", config_path, "JSON configuration file");
  app.add_option("--out", out_dir, "output directory");
  app.add_flag("--verbose,-v", verbose, "progress and per-check margins on stderr");
  for (const char* name : {"solve", "covariance", "flat-limit", "length", "variance-mc", "xray", "all"})
    app.add_subcommand(name)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfig;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  if (seed_opt->count()) seed = seed_value;
  if (threads_opt->count()) threads = threads_value;
  try {
    return execute(command, config_path, out_dir, seed, threads, verbose);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kConfig;
  } catch (const InvariantError& e) {
    std::cerr << "invariant failure: " << e.what() << "\n";
    return kInvariant;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  }
}
