#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "carnot/algebra.hpp"
#include "carnot/functionals.hpp"
#include "carnot/report.hpp"

namespace carnot {

/// Invalid or unresolvable experiment configuration (CLI exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parameters shared by all subcommands; zero or empty fields select the command default.
struct ExperimentConfig {
  std::string group;             // catalog name or path to a group JSON file
  std::string function;          // catalog function name, or "all" for sandwich
  std::vector<double> p;
  std::vector<double> t_grid;
  std::vector<double> s_grid;
  std::vector<double> point;
  std::size_t paths = 0;
  double step_size = 0.0;
  std::uint64_t seed = 42;
  int threads = 1;
  std::optional<double> tolerance;
  std::string out = "reports";

  nlohmann::json to_json() const;
};

/// Reads a config document; unknown keys and wrong types raise ConfigError.
ExperimentConfig parse_experiment_json(const std::string& text);

/// Catalog name or group JSON file; failures raise ConfigError.
GroupDefinition resolve_group(const std::string& spec);

struct CommandResult {
  CheckTable table;
  std::vector<LimitReport> limits;
  nlohmann::json extra = nlohmann::json::object();
  std::string summary;  // one human-readable line for stdout
};

const std::vector<std::string>& command_names();

/// Runs one subcommand other than `acceptance`. Raises ConfigError for invalid input.
CommandResult run_command(const std::string& name, const ExperimentConfig& config);

CommandResult run_validate_group(const ExperimentConfig& config);
CommandResult run_kernel_eval(const ExperimentConfig& config);
CommandResult run_normalization(const ExperimentConfig& config);
CommandResult run_decoupling(const ExperimentConfig& config);
CommandResult run_marginal_test(const ExperimentConfig& config);
CommandResult run_ledoux(const ExperimentConfig& config);
CommandResult run_huisken(const ExperimentConfig& config);
CommandResult run_bbm_limit(const ExperimentConfig& config);
CommandResult run_besov(const ExperimentConfig& config);
CommandResult run_ms_limit(const ExperimentConfig& config);
CommandResult run_sandwich(const ExperimentConfig& config);
CommandResult run_diffquot(const ExperimentConfig& config);

/// Points in [-3, 3]^2 whose two coordinates each run over all 21 values of the uniform grid:
/// z_k = (-3 + 0.3 k, -3 + 0.3 ((8 k) mod 21), 0, ...), k = 0..20.
std::vector<std::vector<double>> decoupling_grid(int m);

}  // namespace carnot
