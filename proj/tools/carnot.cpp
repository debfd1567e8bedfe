#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "carnot/acceptance.hpp"
#include "carnot/experiment.hpp"

using namespace carnot;

namespace {

struct Flags {
  std::string config_file;
  std::string group;
  std::string function;
  std::vector<double> p, t_grid, s_grid, point;
  double t = 0.0;
  std::size_t paths = 0;
  double step_size = 0.0;
  std::uint64_t seed = 42;
  int threads = 1;
  double tolerance = 0.0;
  std::string out;
  std::string positional;
};

void add_common(CLI::App* cmd, Flags& f, std::map<std::string, CLI::Option*>& opts) {
  opts["config"] = cmd->add_option("--config", f.config_file, "JSON config document; flags override its values");
  opts["group"] = cmd->add_option("--group", f.group, "catalog group name or group JSON file");
  opts["function"] = cmd->add_option("--function", f.function, "catalog function name (sandwich also accepts 'all')");
  opts["p"] = cmd->add_option("--p", f.p, "exponent(s) p >= 1")->delimiter(',');
  opts["t-grid"] = cmd->add_option("--t-grid", f.t_grid, "comma-separated times")->delimiter(',');
  opts["t"] = cmd->add_option("--t", f.t, "single time (same as a one-point --t-grid)");
  opts["s-grid"] = cmd->add_option("--s-grid", f.s_grid, "comma-separated smoothness values in (0,1)")->delimiter(',');
  opts["point"] = cmd->add_option("--point", f.point, "comma-separated group point")->delimiter(',');
  opts["paths"] = cmd->add_option("--paths", f.paths, "Monte Carlo sample size");
  opts["step-size"] = cmd->add_option("--step-size", f.step_size, "diffusion step size h");
  opts["seed"] = cmd->add_option("--seed", f.seed, "random seed");
  opts["threads"] = cmd->add_option("--threads", f.threads, "worker thread cap");
  opts["tolerance"] = cmd->add_option("--tolerance", f.tolerance, "override the command's tolerance");
  opts["out"] = cmd->add_option("--out", f.out, "report directory");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot read config file '{}'", path));
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig build_config(const Flags& f, const std::map<std::string, CLI::Option*>& opts) {
  auto given = [&](const char* k) { return opts.at(k)->count() > 0; };
  ExperimentConfig c = f.config_file.empty() ? ExperimentConfig{} : parse_experiment_json(read_file(f.config_file));
  if (given("group")) c.group = f.group;
  if (!f.positional.empty()) c.group = f.positional;
  if (given("function")) c.function = f.function;
  if (given("p")) c.p = f.p;
  if (given("t-grid") && given("t")) throw ConfigError("--t and --t-grid are mutually exclusive");
  if (given("t-grid")) c.t_grid = f.t_grid;
  if (given("t")) c.t_grid = {f.t};
  if (given("s-grid")) c.s_grid = f.s_grid;
  if (given("point")) c.point = f.point;
  if (given("paths")) c.paths = f.paths;
  if (given("step-size")) {
    if (!(f.step_size > 0.0)) throw ConfigError("--step-size must be positive");
    c.step_size = f.step_size;
  }
  if (given("seed")) c.seed = f.seed;
  if (given("threads")) c.threads = f.threads;
  if (given("tolerance")) c.tolerance = f.tolerance;
  if (given("out")) c.out = f.out;
  return c;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ConfigError(fmt::format("cannot write '{}'", path.string()));
  out << text;
}

int finish(const std::string& command, const ExperimentConfig& c, const CommandResult& r) {
  std::filesystem::create_directories(c.out);
  const std::filesystem::path dir(c.out);
  write_file(dir / (command + ".csv"), r.table.to_csv());
  write_file(dir / (command + ".json"), report_json(command, r.table, c.to_json(), r.extra).dump(2) + "\n");
  for (std::size_t k = 0; k < r.limits.size(); ++k) {
    write_file(dir / fmt::format("{}_limit{}.csv", command, k), r.limits[k].to_csv());
  }
  fmt::print("{}\n", r.summary);
  if (const auto* fail = r.table.first_failure()) {
    std::cerr << "check failed: " << CheckTable::describe(*fail) << "\n";
    return 1;
  }
  return 0;
}

int run_acceptance_command(const ExperimentConfig& c) {
  if (!c.group.empty() && c.group != "h1") throw ConfigError("acceptance runs on --group h1 only");
  if (!c.function.empty() || !c.p.empty() || !c.t_grid.empty() || !c.s_grid.empty() || !c.point.empty() ||
      c.paths != 0 || c.step_size != 0.0 || c.tolerance) {
    throw ConfigError("acceptance uses fixed criterion settings; only --group, --seed, --threads and --out apply");
  }
  if (c.threads < 1) throw ConfigError("threads must be at least 1");
  const auto results = run_acceptance(c, [](const CriterionResult& r) {
    fmt::print("{}\n", r.line());
    std::fflush(stdout);
  });
  CommandResult r;
  r.table = acceptance_table(results);
  r.extra["criteria"] = acceptance_json(results);
  int passed = 0;
  for (const auto& x : results) passed += x.passed() ? 1 : 0;
  r.summary = fmt::format("{}/{} criteria passed", passed, results.size());
  return finish("acceptance", c, r);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Heat-kernel and nonlocal-functional experiments on Carnot groups"};
  app.require_subcommand(1);
  Flags flags;
  std::map<std::string, std::map<std::string, CLI::Option*>> options;
  std::vector<std::string> names = command_names();
  names.push_back("acceptance");
  for (const auto& name : names) {
    auto* cmd = app.add_subcommand(name);
    add_common(cmd, flags, options[name]);
    if (name == "validate-group") cmd->add_option("group-file", flags.positional, "group JSON file or catalog name");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  try {
    const auto config = build_config(flags, options.at(command));
    if (command == "acceptance") return run_acceptance_command(config);
    return finish(command, config, run_command(command, config));
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
}
