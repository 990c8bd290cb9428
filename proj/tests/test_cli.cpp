#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

#include "blaschke/pipeline.hpp"

#ifndef BLASCHKE_CLI_PATH
#define BLASCHKE_CLI_PATH "blaschke"
#endif

namespace fs = std::filesystem;
using namespace blaschke;

namespace {

const char* kSmall = R"({
  "mesh": {"h": 0.3},
  "series": {"truncation": 4},
  "grids": {"solve": {"start": 0.1, "stop": 100, "count": 5},
            "length": {"start": 0.01, "stop": 100, "count": 9}},
  "flat_limit": {"t": [10, 100]},
  "spectral": {"k": 20},
  "mc": {"T": 5, "n": 20, "modes": 2},
  "xray": {"forms": 1, "geodesics": 2, "points": 256, "modes": 3, "radius": 0.5}
})";

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

class CliTest : public ::testing::Test {
protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("blaschke_cli_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write_config(const std::string& text, const std::string& name = "config.json") {
    const fs::path p = dir_ / name;
    write_text(p, text);
    return p;
  }

  /// Exit status of the CLI; stderr goes to err.txt.
  int run(const std::string& args) {
    const std::string cmd = std::string("\"") + BLASCHKE_CLI_PATH + "\" " + args + " > \"" + (dir_ / "out.txt").string() +
                            "\" 2> \"" + (dir_ / "err.txt").string() + "\"";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
  }
  std::string err() const { return slurp(dir_ / "err.txt"); }

  Json small_with(const Json& patch) {
    Json j = Json::parse(kSmall);
    j.merge_patch(patch);
    return j;
  }

  fs::path dir_;
};

}  // namespace

TEST(Config, DefaultsAreValid) {
  EXPECT_NO_THROW(validate(RunConfig{}));
  const auto t = RunConfig{}.solve_grid.points();
  EXPECT_EQ(t.size(), 21u);
  EXPECT_EQ(t.back(), 1e4);
}

TEST(Config, RejectsBadInput) {
  EXPECT_THROW(parse_config(Json::parse(R"({"mesh": {"h": -1}})")), ConfigError);
  EXPECT_THROW(parse_config(Json::parse(R"({"bogus": 1})")), ConfigError);
  EXPECT_THROW(parse_config(Json::parse(R"({"grids": {"solve": {"values": [0, 2, 1]}}})")), ConfigError);
  EXPECT_THROW(parse_config(Json::parse(R"({"grids": {"solve": {"start": 10, "stop": 1}}})")), ConfigError);
  EXPECT_THROW(parse_config(Json::parse(R"({"series": {"seed": "banana"}})")), ConfigError);
  EXPECT_THROW(parse_config(Json::parse(R"({"series": {"seed": [1, 2, 3, 4]}})")), ConfigError);
  EXPECT_THROW(parse_config(Json::parse(R"({"mc": {"n": "many"}})")), ConfigError);
  EXPECT_THROW(parse_config(Json::parse(R"({"mc": {"dt": 0.5}})")), ConfigError);
  EXPECT_THROW(parse_config(Json::parse(R"({"spectral": {"k": 0}})")), ConfigError);
}

TEST(Config, ParsesSeedsAndGrids) {
  const auto c = parse_config(Json::parse(R"({"series": {"seed": [1, [0, 2]]}, "grids": {"solve": {"values": [0, 1, 5]}}})"));
  EXPECT_EQ(c.seed_kind, "custom");
  EXPECT_EQ(c.seed_coefficients[1], Complex(0.0, 2.0));
  EXPECT_EQ(c.seed_coefficients[2], Complex(0.0, 0.0));
  EXPECT_EQ(c.solve_grid.points(), (std::vector<double>{0.0, 1.0, 5.0}));
  EXPECT_EQ(parse_config(Json::parse(R"({"series": {"seed": "zero"}})")).seed_kind, "zero");
}

TEST(Config, HashIgnoresOutputAndThreads) {
  RunConfig a, b;
  b.output = "elsewhere";
  b.threads = 7;
  EXPECT_EQ(config_hash(a), config_hash(b));
  b.seed = 2;
  EXPECT_NE(config_hash(a), config_hash(b));
  EXPECT_EQ(config_hash(a).size(), 16u);
}

TEST(Io, SeventeenDigitsAndStableLayout) {
  EXPECT_EQ(format_double(0.1), "0.10000000000000001");
  EXPECT_EQ(format_double(2.0), "2");
  EXPECT_EQ(format_double(std::nan("")), "null");
  Json j = {{"b", 0.1}, {"a", Json::array({1, 2.5})}, {"n", {{"x", true}}}};
  const std::string text = dump_json(j);
  EXPECT_EQ(text, "{\n  \"b\": 0.10000000000000001,\n  \"a\": [1, 2.5],\n  \"n\": {\n    \"x\": true\n  }\n}\n");
  EXPECT_EQ(Json::parse(text)["b"].get<double>(), 0.1);
  CsvTable t({"x", "y"});
  t.add({1.0, 1.0 / 3.0});
  EXPECT_EQ(t.str(), "x,y\n1,0.33333333333333331\n");
  EXPECT_THROW(t.add({1.0}), ConfigError);
  EXPECT_EQ(fnv1a(""), 0xcbf29ce484222325ULL);
}

TEST(Pipeline, ZeroDifferentialGivesTrivialReports) {
  RunConfig c = parse_config(Json::parse(kSmall));
  c.seed_kind = "zero";
  Context ctx(c);
  const Section solve = run_solve(ctx);
  EXPECT_TRUE(solve.ok());
  const Section cov = run_covariance(ctx, true, false);
  EXPECT_EQ(cov.results["fiber"]["total"].get<double>(), 0.0);
  EXPECT_TRUE(cov.ok());
  EXPECT_THROW(run_flat_limit(ctx), ConfigError);
}

TEST(Pipeline, CheckMarginsHaveTheRightSign) {
  const Check pass{"a", 0.5, "<", 1.0};
  const Check fail{"b", 2.0, "<=", 1.0};
  const Check nan{"c", std::nan(""), ">", 0.0};
  EXPECT_TRUE(pass.pass());
  EXPECT_GT(pass.margin(), 0.0);
  EXPECT_FALSE(fail.pass());
  EXPECT_LT(fail.margin(), 0.0);
  EXPECT_FALSE(nan.pass());
}

TEST_F(CliTest, ZeroSeedSolveSucceeds) {
  const auto cfg = write_config(small_with({{"series", {{"seed", "zero"}}}}).dump());
  EXPECT_EQ(run("solve --config \"" + cfg.string() + "\" --out \"" + (dir_ / "o").string() + "\""), 0) << err();
  const Json summary = Json::parse(slurp(dir_ / "o" / "solve.json"));
  EXPECT_EQ(summary["status"], "pass");
  EXPECT_EQ(summary["sections"]["solve"]["results"]["baseline_u_sup"].get<double>(), 0.0);
  EXPECT_TRUE(fs::exists(dir_ / "o" / "solve_sweep_table.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "o" / "group.json"));
  EXPECT_TRUE(fs::exists(dir_ / "o" / "mesh.json"));
}

TEST_F(CliTest, DefaultSeedSolveHasMonotoneColumns) {
  const auto cfg = write_config(kSmall);
  EXPECT_EQ(run("solve --config \"" + cfg.string() + "\" --out \"" + (dir_ / "o").string() + "\""), 0) << err();
  std::istringstream csv(slurp(dir_ / "o" / "solve_sweep_table.csv"));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line.rfind("t,u_min,u_max,area", 0), 0u);
  double previous_max = -1.0;
  while (std::getline(csv, line)) {
    std::istringstream row(line);
    std::string cell;
    std::getline(row, cell, ',');
    std::getline(row, cell, ',');
    std::getline(row, cell, ',');
    const double u_max = std::stod(cell);
    EXPECT_GE(u_max, previous_max);
    previous_max = u_max;
  }
}

TEST_F(CliTest, ConfigErrorsExitWithTwo) {
  const auto bad_grid = write_config(small_with({{"grids", {{"solve", {{"values", {0, 5, 1}}}}}}}).dump());
  EXPECT_EQ(run("solve --config \"" + bad_grid.string() + "\""), 2);
  EXPECT_NE(err().find("strictly increasing"), std::string::npos) << err();
  EXPECT_EQ(run("solve --config \"" + (dir_ / "missing.json").string() + "\""), 2);
  EXPECT_EQ(run("solve --no-such-flag"), 2);
  EXPECT_EQ(run("frobnicate"), 2);
  const auto zero = write_config(small_with({{"series", {{"seed", "zero"}}}}).dump(), "zero.json");
  EXPECT_EQ(run("flat-limit --config \"" + zero.string() + "\" --out \"" + (dir_ / "o").string() + "\""), 2);
  EXPECT_NE(err().find("nonzero"), std::string::npos) << err();
}

TEST_F(CliTest, AllIsDeterministicAndTraceable) {
  const auto cfg = write_config(kSmall);
  std::string texts[2];
  for (int i = 0; i < 2; ++i) {
    const fs::path out = dir_ / ("run" + std::to_string(i));
    const int code = run("all --config \"" + cfg.string() + "\" --seed 5 --out \"" + out.string() + "\"");
    EXPECT_TRUE(code == 0 || code == 1) << err();
    texts[i] = slurp(out / "all.json");
  }
  ASSERT_FALSE(texts[0].empty());
  EXPECT_EQ(texts[0], texts[1]);
  const Json summary = Json::parse(texts[0]);
  EXPECT_EQ(summary["config"]["seed"].get<int>(), 5);
  EXPECT_EQ(summary["config_hash"].get<std::string>().size(), 16u);
  EXPECT_TRUE(summary["versions"].contains("spectral_covariance"));
  for (const char* section : {"solve", "flat-limit", "covariance", "xray"})
    EXPECT_TRUE(summary["sections"].contains(section)) << section;
  for (const auto& check : summary["sections"]["solve"]["checks"]) EXPECT_TRUE(check.contains("margin"));
  EXPECT_TRUE(fs::exists(dir_ / "run0" / "covariance_length_table.csv"));
}
