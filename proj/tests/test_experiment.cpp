#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include <fmt/format.h>

#include "carnot/acceptance.hpp"
#include "carnot/experiment.hpp"

using namespace carnot;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun cli(const std::string& args) {
  const auto dir = std::filesystem::temp_directory_path() / "carnot_cli_test";
  std::filesystem::create_directories(dir);
  const auto out = dir / "stdout.txt", err = dir / "stderr.txt";
  const std::string cmd = fmt::format("{} {} > {} 2> {}", CARNOT_CLI, args, out.string(), err.string());
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "carnot_cli_test" / name;
  std::filesystem::remove_all(dir);
  return dir;
}

}  // namespace

TEST(Config, ParsesEveryKey) {
  const auto c = parse_experiment_json(R"({"group": "engel", "function": "engel_bump", "p": [1, 2],
      "t_grid": 0.5, "s_grid": [0.9], "point": [0, 1, 2, 3], "paths": 1000, "step_size": 0.01,
      "seed": 7, "threads": 3, "tolerance": 0.1, "out": "x"})");
  EXPECT_EQ(c.group, "engel");
  EXPECT_EQ(c.p, (std::vector<double>{1, 2}));
  EXPECT_EQ(c.t_grid, (std::vector<double>{0.5}));
  EXPECT_EQ(c.paths, 1000u);
  EXPECT_EQ(c.seed, 7u);
  EXPECT_EQ(c.threads, 3);
  ASSERT_TRUE(c.tolerance);
  EXPECT_DOUBLE_EQ(*c.tolerance, 0.1);
  EXPECT_EQ(parse_experiment_json(c.to_json().dump()).to_json(), c.to_json());
}

TEST(Config, RejectsBadDocuments) {
  EXPECT_THROW(parse_experiment_json("{"), ConfigError);
  EXPECT_THROW(parse_experiment_json("[]"), ConfigError);
  EXPECT_THROW(parse_experiment_json(R"({"grop": "h1"})"), ConfigError);
  EXPECT_THROW(parse_experiment_json(R"({"p": "two"})"), ConfigError);
  EXPECT_THROW(parse_experiment_json(R"({"paths": -3})"), ConfigError);
  EXPECT_THROW(resolve_group("no_such_group"), ConfigError);
  ExperimentConfig c;
  c.group = "h1";
  c.p = {0.5};
  EXPECT_THROW(run_command("bbm-limit", c), ConfigError);
  c.p = {2.0};
  c.function = "engel_bump";
  EXPECT_THROW(run_command("bbm-limit", c), ConfigError);
  c.function = "h1_bump";
  c.t_grid = {1e-3, 2e-3, 4e-3};
  EXPECT_THROW(run_command("bbm-limit", c), ConfigError);
  EXPECT_THROW(run_command("nope", c), ConfigError);
  ExperimentConfig k;
  k.group = "engel";
  EXPECT_THROW(run_command("kernel-eval", k), ConfigError);
  EXPECT_THROW(run_criterion(15, k), ConfigError);
}

TEST(CheckTable, GatesInfoRowsAndCsvQuoting) {
  CheckTable t;
  t.add("in range", 1.0, 0.1, 1.0, 0.5, 1.5);
  t.add_info("diagnostic, far off", 100.0);
  EXPECT_TRUE(t.ok());
  t.add("out of range", 2.0, 0.1, 1.0, 0.5, 1.5);
  ASSERT_NE(t.first_failure(), nullptr);
  EXPECT_EQ(t.first_failure()->name, "out of range");
  const auto csv = t.to_csv();
  EXPECT_NE(csv.find("\"diagnostic, far off\""), std::string::npos);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "check,value,error,target,lower,upper,gate,passed");
  const auto j = report_json("demo", t, {{"seed", 1}});
  EXPECT_EQ(j["schema_version"], kReportSchemaVersion);
  EXPECT_FALSE(j["ok"].get<bool>());
  EXPECT_TRUE(j["metadata"].contains("generated_at"));
  CheckTable merged;
  merged.append(t, "C1 ");
  EXPECT_EQ(merged.rows().back().name, "C1 out of range");
}

TEST(Runners, KernelEvalAtIdentity) {
  ExperimentConfig c;
  c.group = "h1";
  const auto r = run_kernel_eval(c);
  EXPECT_TRUE(r.table.ok());
  EXPECT_NE(r.summary.find("value 0.0625"), std::string::npos) << r.summary;
}

TEST(Runners, ValidateGroupFromFile) {
  ExperimentConfig c;
  c.group = std::string(CARNOT_TOOLS_DIR) + "/engel.json";
  const auto r = run_validate_group(c);
  EXPECT_TRUE(r.table.ok());
  EXPECT_EQ(r.extra["group"], "engel");
}

TEST(Runners, DecouplingGridShape) {
  const auto g = decoupling_grid(2);
  ASSERT_EQ(g.size(), 21u);
  EXPECT_DOUBLE_EQ(g.front()[0], -3.0);
  EXPECT_DOUBLE_EQ(g.back()[0], 3.0);
  std::vector<double> second;
  for (const auto& z : g) second.push_back(z[1]);
  std::sort(second.begin(), second.end());
  for (int k = 0; k <= 20; ++k) EXPECT_NEAR(second[k], -3.0 + 0.3 * k, 1e-12);
}

TEST(Runners, CriterionTwoPasses) {
  const auto r = run_criterion(2, ExperimentConfig{});
  EXPECT_TRUE(r.passed()) << r.line();
  EXPECT_EQ(r.line().substr(0, 4), "PASS");
}

TEST(Cli, KernelEvalPrintsOracleValue) {
  const auto dir = scratch("kernel");
  const auto r = cli("kernel-eval --group h1 --point 0,0,0 --t 1 --out " + dir.string());
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("value 0.0625"), std::string::npos) << r.out;
  EXPECT_TRUE(std::filesystem::exists(dir / "kernel-eval.csv"));
  const auto j = nlohmann::json::parse(slurp(dir / "kernel-eval.json"));
  EXPECT_EQ(j["schema_version"], kReportSchemaVersion);
  EXPECT_EQ(j["command"], "kernel-eval");
}

TEST(Cli, ValidateGroupFile) {
  const auto r = cli(fmt::format("validate-group {}/engel.json --out {}", CARNOT_TOOLS_DIR, scratch("validate").string()));
  EXPECT_EQ(r.code, 0) << r.err;
}

TEST(Cli, ExitCodes) {
  const auto out = scratch("codes").string();
  EXPECT_EQ(cli("kernel-eval --group nowhere --out " + out).code, 2);
  EXPECT_EQ(cli("bbm-limit --group h1 --p 0.5 --out " + out).code, 2);
  EXPECT_EQ(cli("acceptance --group engel --out " + out).code, 2);
  EXPECT_EQ(cli("frobnicate").code, 2);
  const auto fail = cli("normalization --group h1 --t 1 --tolerance 1e-30 --out " + out);
  EXPECT_EQ(fail.code, 1);
  EXPECT_NE(fail.err.find("check failed"), std::string::npos) << fail.err;
}

TEST(Cli, FlagsOverrideConfigFile) {
  const auto dir = scratch("override");
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "cfg.json") << R"({"group": "engel", "t_grid": [2.0]})";
  const auto r = cli(fmt::format("kernel-eval --config {} --group h1 --out {}", (dir / "cfg.json").string(), dir.string()));
  EXPECT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(slurp(dir / "kernel-eval.json"));
  EXPECT_EQ(j["config"]["group"], "h1");
  EXPECT_EQ(j["config"]["t_grid"], nlohmann::json::array({2.0}));
}

TEST(Cli, IdenticalSeedGivesByteIdenticalCsv) {
  const auto a = scratch("det_a"), b = scratch("det_b");
  const std::string args = "marginal-test --group h1 --paths 20000 --seed 5 --threads ";
  EXPECT_EQ(cli(args + "1 --out " + a.string()).code, 0);
  EXPECT_EQ(cli(args + "3 --out " + b.string()).code, 0);
  EXPECT_EQ(slurp(a / "marginal-test.csv"), slurp(b / "marginal-test.csv"));
  EXPECT_FALSE(slurp(a / "marginal-test.csv").empty());
}
