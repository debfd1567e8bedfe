#pragma once

#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "carnot/experiment.hpp"

namespace carnot {

struct CriterionResult {
  int id = 0;
  std::string title;
  CheckTable table;
  std::string summary;
  double seconds = 0.0;

  bool passed() const { return table.ok(); }
  /// "PASS  3 normalization and scaling: ..." for stdout.
  std::string line() const;
};

/// Number of acceptance criteria.
inline constexpr int kCriterionCount = 14;

/// Runs one criterion (1-based id). Only `seed` and `threads` of `base` are used.
CriterionResult run_criterion(int id, const ExperimentConfig& base);

/// Runs every criterion in order, calling `progress` after each one.
std::vector<CriterionResult> run_acceptance(const ExperimentConfig& base,
                                            const std::function<void(const CriterionResult&)>& progress = {});

/// All rows of all criteria, each prefixed with "C<id> ".
CheckTable acceptance_table(const std::vector<CriterionResult>& results);

/// Per-criterion summary: [{id, title, passed, summary, seconds}].
nlohmann::json acceptance_json(const std::vector<CriterionResult>& results);

}  // namespace carnot
