#include "carnot/report.hpp"

#include <chrono>
#include <cmath>
#include <ctime>

#include <fmt/format.h>

namespace carnot {

namespace {

std::string number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  return fmt::format("{:.17g}", v);
}

nlohmann::json json_number(double v) {
  if (std::isfinite(v)) return v;
  return number(v);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

}  // namespace

Check& CheckTable::add(const std::string& name, double value, double error, double target, double lower,
                       double upper) {
  Check c{name, value, error, target, lower, upper, true, lower <= value && value <= upper};
  rows_.push_back(c);
  return rows_.back();
}

Check& CheckTable::add_verdict(const std::string& name, bool passed, double value, double error, double target) {
  Check c;
  c.name = name;
  c.value = value;
  c.error = error;
  c.target = target;
  c.passed = passed;
  rows_.push_back(c);
  return rows_.back();
}

Check& CheckTable::add_info(const std::string& name, double value, double error, double target) {
  Check c;
  c.name = name;
  c.value = value;
  c.error = error;
  c.target = target;
  c.gate = false;
  rows_.push_back(c);
  return rows_.back();
}

void CheckTable::append(const CheckTable& other, const std::string& prefix) {
  for (auto c : other.rows_) {
    c.name = prefix + c.name;
    rows_.push_back(std::move(c));
  }
}

bool CheckTable::ok() const { return first_failure() == nullptr; }

const Check* CheckTable::first_failure() const {
  for (const auto& c : rows_) {
    if (c.gate && !c.passed) return &c;
  }
  return nullptr;
}

std::string CheckTable::describe(const Check& c) {
  return fmt::format("{}: value={:.6g} error={:.3g} target={:.6g} bounds [{}, {}]", c.name, c.value, c.error, c.target,
                     number(c.lower), number(c.upper));
}

std::string CheckTable::to_csv() const {
  std::string out = "check,value,error,target,lower,upper,gate,passed\n";
  for (const auto& c : rows_) {
    out += fmt::format("{},{},{},{},{},{},{},{}\n", csv_field(c.name), number(c.value), number(c.error), number(c.target),
                       number(c.lower), number(c.upper), c.gate ? 1 : 0, c.passed ? 1 : 0);
  }
  return out;
}

nlohmann::json CheckTable::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& c : rows_) {
    rows.push_back({{"check", c.name},
                    {"value", json_number(c.value)},
                    {"error", json_number(c.error)},
                    {"target", json_number(c.target)},
                    {"lower", json_number(c.lower)},
                    {"upper", json_number(c.upper)},
                    {"gate", c.gate},
                    {"passed", c.passed}});
  }
  return rows;
}

nlohmann::json report_json(const std::string& command, const CheckTable& table, const nlohmann::json& config,
                           const nlohmann::json& extra) {
  nlohmann::json j;
  j["schema_version"] = kReportSchemaVersion;
  j["command"] = command;
  j["ok"] = table.ok();
  j["checks"] = table.to_json();
  j["config"] = config;
  for (const auto& [k, v] : extra.items()) j[k] = v;
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  j["metadata"] = {{"generated_at", buf}};
  return j;
}

}  // namespace carnot
