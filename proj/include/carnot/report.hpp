#pragma once

#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

namespace carnot {

inline constexpr int kReportSchemaVersion = 1;

/// One row of a check report. Gated rows pass iff lower <= value <= upper;
/// ungated rows are diagnostics and never fail the report.
struct Check {
  std::string name;
  double value = 0.0;
  double error = 0.0;
  double target = 0.0;
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
  bool gate = true;
  bool passed = true;
};

class CheckTable {
 public:
  /// Adds a gated row; passed iff lower <= value <= upper.
  Check& add(const std::string& name, double value, double error, double target, double lower, double upper);
  /// Adds a gated row with an explicit verdict (value carries the measured quantity).
  Check& add_verdict(const std::string& name, bool passed, double value = 0.0, double error = 0.0,
                     double target = 0.0);
  /// Adds a diagnostic row.
  Check& add_info(const std::string& name, double value, double error = 0.0, double target = 0.0);
  /// Copies every row of `other`, prefixing names with `prefix`.
  void append(const CheckTable& other, const std::string& prefix = "");

  const std::vector<Check>& rows() const { return rows_; }
  bool ok() const;
  const Check* first_failure() const;
  /// "name: value=..., bounds [lo, hi]" for stderr.
  static std::string describe(const Check& c);

  /// Columns check,value,error,target,lower,upper,gate,passed; fixed formatting for byte-stable output.
  std::string to_csv() const;
  nlohmann::json to_json() const;

 private:
  std::vector<Check> rows_;
};

/// {"schema_version", "command", "ok", "checks", "config", "metadata": {"generated_at"}}.
nlohmann::json report_json(const std::string& command, const CheckTable& table, const nlohmann::json& config,
                           const nlohmann::json& extra = nlohmann::json::object());

}  // namespace carnot
