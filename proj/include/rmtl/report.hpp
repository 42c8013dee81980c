#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "rmtl/hypothesis_tests.hpp"
#include "rmtl/permutation.hpp"
#include "rmtl/sample.hpp"
#include "rmtl/simulation.hpp"

namespace rmtl {

// CSV with a header naming the columns time, status and group (any order,
// extra columns ignored).  Row numbers in errors count the header as row 1.
Sample parse_dataset(const std::filesystem::path& path);
Sample parse_dataset_text(std::string_view text);

struct Interval {
  double estimate = 0.0;
  double ci_lower = 0.0;
  double ci_upper = 0.0;
  double se = 0.0;

  friend bool operator==(const Interval&, const Interval&) = default;
};

struct GroupSummary {
  int group = 1;
  std::size_t n = 0;
  std::size_t events_interest = 0;
  std::size_t events_competing = 0;
  std::size_t censored = 0;
  Interval rmtl;
  Interval rmst_interest;
  Interval rc;
  Interval rmst_composite;

  friend bool operator==(const GroupSummary&, const GroupSummary&) = default;
};

struct AnalysisOptions {
  std::optional<double> tau;
  double alpha = 0.05;
  std::size_t permutations = 200;
  std::uint64_t seed = 20200901;
  unsigned threads = 0;
  TauMode tau_mode = TauMode::Recompute;
};

struct AnalysisReport {
  double tau = 0.0;
  std::string tau_source;  // "rule" or "user"
  double alpha = 0.05;
  std::size_t permutations = 0;
  std::uint64_t seed = 0;
  std::string tau_mode;  // "recompute" or "fixed"
  std::vector<GroupSummary> groups;
  std::vector<TestOutcome> tests;
  std::vector<std::string> warnings;

  friend bool operator==(const AnalysisReport&, const AnalysisReport&) = default;
};

AnalysisReport analyze(const Sample& sample, const AnalysisOptions& options);

nlohmann::json to_json(const AnalysisReport& report);
AnalysisReport analysis_report_from_json(const nlohmann::json& j);
std::string format_text(const AnalysisReport& report);

// Step-function data for external plotting: per group, the CIF of interest
// and one minus the competing CIF, one two-column file per curve.
std::vector<std::filesystem::path> write_figure_data(const Sample& sample, double tau,
                                                     const std::filesystem::path& dir);

ScenarioConfig parse_config_text(std::string_view text);
ScenarioConfig parse_config_file(const std::filesystem::path& path);

nlohmann::json to_json(const ScenarioConfig& config);
nlohmann::json to_json(const MonteCarloReport& report);
// Columns: method, rejection_rate, mc_stderr.
std::string format_tsv(const MonteCarloReport& report);
// Rows (n1,n2) x censoring, one column per method.
std::string format_grid_table(const std::vector<MonteCarloReport>& reports);

}  // namespace rmtl
