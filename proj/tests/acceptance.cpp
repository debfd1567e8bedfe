#include <cstdio>
#include <filesystem>
#include <fstream>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "carnot/acceptance.hpp"

using namespace carnot;

int main(int argc, char** argv) {
  CLI::App app{"Acceptance suite: one PASS/FAIL line per criterion"};
  ExperimentConfig base;
  base.threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  std::vector<int> only;
  std::string out;
  app.add_option("--seed", base.seed, "random seed");
  app.add_option("--threads", base.threads, "worker thread cap");
  app.add_option("--only", only, "run only these criterion ids")->delimiter(',');
  app.add_option("--out", out, "directory for acceptance.csv and acceptance.json");
  CLI11_PARSE(app, argc, argv);

  std::vector<CriterionResult> results;
  auto report = [](const CriterionResult& r) {
    fmt::print("{}  ({:.1f} s)\n", r.line(), r.seconds);
    if (const auto* fail = r.table.first_failure()) fmt::print("       first failing check: {}\n", CheckTable::describe(*fail));
    std::fflush(stdout);
  };
  if (only.empty()) {
    results = run_acceptance(base, report);
  } else {
    for (int id : only) {
      results.push_back(run_criterion(id, base));
      report(results.back());
    }
  }
  int passed = 0;
  for (const auto& r : results) passed += r.passed() ? 1 : 0;
  fmt::print("{}/{} criteria passed\n", passed, results.size());
  if (!out.empty()) {
    std::filesystem::create_directories(out);
    const auto table = acceptance_table(results);
    std::ofstream(std::filesystem::path(out) / "acceptance.csv") << table.to_csv();
    auto extra = nlohmann::json::object();
    extra["criteria"] = acceptance_json(results);
    std::ofstream(std::filesystem::path(out) / "acceptance.json")
        << report_json("acceptance", table, base.to_json(), extra).dump(2) << "\n";
  }
  return passed == static_cast<int>(results.size()) ? 0 : 1;
}
