// rmtl: analyze competing-risks datasets and run the Monte Carlo study.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "rmtl/error.hpp"
#include "rmtl/report.hpp"
#include "rmtl/simulation.hpp"

namespace {

constexpr int kExitInput = 2;
constexpr int kExitDegenerate = 3;

struct AnalyzeArgs {
  std::string file;
  std::optional<double> tau;
  double alpha = 0.05;
  std::size_t perms = 200;
  std::uint64_t seed = 20200901;
  unsigned threads = 0;
  std::string tau_mode = "recompute";
  std::string json_out;
  std::string figure_dir;
};

struct SimulateArgs {
  std::string config;
  std::string scenario;
  std::size_t n1 = 0, n2 = 0, reps = 0, perms = 0;
  double censoring = 0.0, alpha = 0.0, beta = 0.0, p1 = 0.0;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  std::string tau_mode;
  std::string censoring_mode;
  bool grid = false;
  bool calibrate_beta = false;
  bool include_composite = false;
  std::string out;
};

void write_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw rmtl::InputError("cannot write " + path.string());
  out << text;
}

int run_analyze(const AnalyzeArgs& a) {
  const rmtl::Sample sample = rmtl::parse_dataset(a.file);
  rmtl::AnalysisOptions options;
  options.tau = a.tau;
  options.alpha = a.alpha;
  options.permutations = a.perms;
  options.seed = a.seed;
  options.threads = a.threads;
  options.tau_mode = a.tau_mode == "fixed" ? rmtl::TauMode::Fixed : rmtl::TauMode::Recompute;
  const rmtl::AnalysisReport report = rmtl::analyze(sample, options);
  std::cout << rmtl::format_text(report);
  if (!a.json_out.empty()) write_file(a.json_out, rmtl::to_json(report).dump(2) + "\n");
  if (!a.figure_dir.empty()) {
    for (const auto& p : rmtl::write_figure_data(sample, report.tau, a.figure_dir)) {
      std::cerr << "wrote " << p.string() << "\n";
    }
  }
  return 0;
}

std::string cell_name(const rmtl::ScenarioConfig& c) {
  return std::string("scenario") + rmtl::scenario_letter(c.scenario) + "_n" + std::to_string(c.n1) +
         "_" + std::to_string(c.n2) + "_c" +
         std::to_string(static_cast<int>(std::lround(c.target_censoring * 100.0)));
}

int run_simulate(const SimulateArgs& a, const CLI::App& cmd) {
  rmtl::ScenarioConfig c;
  if (!a.config.empty()) c = rmtl::parse_config_file(a.config);
  auto given = [&](const char* name) { return cmd.count(name) > 0; };
  if (given("--scenario")) {
    c.scenario = rmtl::scenario_from_letter(a.scenario);
    if (c.scenario != rmtl::Scenario::B) c.beta.reset();
  }
  if (given("--n1")) c.n1 = a.n1;
  if (given("--n2")) c.n2 = a.n2;
  if (given("--censoring")) c.target_censoring = a.censoring;
  if (given("--censoring-mode")) c.censoring_mode = rmtl::censoring_mode_from_name(a.censoring_mode);
  if (given("--reps")) c.replications = a.reps;
  if (given("--perms")) c.permutations = a.perms;
  if (given("--alpha")) c.alpha = a.alpha;
  if (given("--seed")) c.seed = a.seed;
  if (given("--beta")) c.beta = a.beta;
  if (given("--p1")) c.p1 = a.p1;
  if (given("--threads")) c.threads = a.threads;
  if (given("--tau-mode")) {
    c.tau_mode = a.tau_mode == "fixed" ? rmtl::TauMode::Fixed : rmtl::TauMode::Recompute;
  }
  if (a.include_composite) c.include_composite = true;
  c = rmtl::validated(c);

  if (a.calibrate_beta) {
    rmtl::ScenarioConfig target = c;
    target.n1 = 50;
    target.n2 = 50;
    target.target_censoring = 0.0;
    const auto cal = rmtl::calibrate_beta(target, 0.795);
    c.beta = cal.beta;
    std::cerr << "calibrated beta = " << cal.beta << " (Gray power " << cal.achieved_power
              << " at n1=n2=50, no censoring)\n";
  }

  const std::filesystem::path out_dir = a.out;
  if (a.grid) {
    const auto reports = rmtl::run_grid(c);
    const std::string table = rmtl::format_grid_table(reports);
    std::cout << "Scenario " << rmtl::scenario_letter(c.scenario) << "\n" << table;
    if (!a.out.empty()) {
      const std::string stem = std::string("grid_") + rmtl::scenario_letter(c.scenario);
      write_file(out_dir / (stem + ".tsv"), table);
      nlohmann::json cells = nlohmann::json::array();
      for (const auto& r : reports) cells.push_back(rmtl::to_json(r));
      if (c.scenario == rmtl::Scenario::A) {
        nlohmann::json dev = nlohmann::json::object();
        for (const auto& [m, v] : rmtl::summarize_deviation(reports)) {
          dev[std::string(rmtl::method_name(m))] = v;
        }
        write_file(out_dir / (stem + ".json"),
                   nlohmann::json{{"cells", cells}, {"mean_abs_deviation", dev}}.dump(2) + "\n");
      } else {
        write_file(out_dir / (stem + ".json"), nlohmann::json{{"cells", cells}}.dump(2) + "\n");
      }
    }
    return 0;
  }

  const rmtl::MonteCarloReport report = rmtl::run_monte_carlo(c);
  const std::string tsv = rmtl::format_tsv(report);
  std::cout << tsv;
  for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
  if (!a.out.empty()) {
    write_file(out_dir / (cell_name(c) + ".tsv"), tsv);
    write_file(out_dir / (cell_name(c) + ".json"), rmtl::to_json(report).dump(2) + "\n");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Restricted mean time lost tests for competing-risks data"};
  app.require_subcommand(1);

  AnalyzeArgs aa;
  auto* analyze = app.add_subcommand("analyze", "Analyze a two-group competing-risks CSV");
  analyze->add_option("file", aa.file, "CSV with columns time,status,group")->required();
  analyze->add_option("--tau", aa.tau, "Restriction time (default: data-driven rule)")
      ->check(CLI::PositiveNumber);
  analyze->add_option("--alpha", aa.alpha, "Significance level")->check(CLI::Range(0.0, 1.0));
  analyze->add_option("--perms", aa.perms, "Permutations for combined tests")
      ->check(CLI::PositiveNumber);
  analyze->add_option("--seed", aa.seed, "Permutation seed");
  analyze->add_option("--threads", aa.threads, "Worker threads (0 = all cores)");
  analyze->add_option("--tau-mode", aa.tau_mode, "tau inside permutations")
      ->check(CLI::IsMember({"recompute", "fixed"}));
  analyze->add_option("--json", aa.json_out, "Write the report as JSON");
  analyze->add_option("--figure-data", aa.figure_dir, "Write CIF step data for plotting");

  SimulateArgs sa;
  auto* simulate = app.add_subcommand("simulate", "Run the Monte Carlo type I error / power study");
  simulate->add_option("--config", sa.config, "key = value or JSON scenario config");
  simulate->add_option("--scenario", sa.scenario, "A, B, C or D");
  simulate->add_option("--n1", sa.n1, "Group 1 size");
  simulate->add_option("--n2", sa.n2, "Group 2 size");
  simulate->add_option("--censoring", sa.censoring, "Target censoring fraction, e.g. 0.3");
  simulate->add_option("--censoring-mode", sa.censoring_mode,
                       "pooled (one bound for both groups) or per_group")
      ->check(CLI::IsMember({"pooled", "per_group"}));
  simulate->add_option("--reps", sa.reps, "Monte Carlo replications");
  simulate->add_option("--perms", sa.perms, "Permutations per replicate");
  simulate->add_option("--alpha", sa.alpha, "Nominal level");
  simulate->add_option("--seed", sa.seed, "Experiment seed");
  simulate->add_option("--beta", sa.beta, "Scenario B effect size");
  simulate->add_option("--p1", sa.p1, "Limiting incidence of the event of interest");
  simulate->add_option("--threads", sa.threads, "Worker threads (0 = all cores)");
  simulate->add_option("--tau-mode", sa.tau_mode, "tau inside permutations")
      ->check(CLI::IsMember({"recompute", "fixed"}));
  simulate->add_flag("--grid", sa.grid, "Run every (n1,n2) x censoring cell of the scenario");
  simulate->add_flag("--calibrate-beta", sa.calibrate_beta,
                     "Scenario B: pick beta so Gray's power at n1=n2=50, 0% censoring is 0.795");
  simulate->add_flag("--include-composite", sa.include_composite, "Also score Diff*, RMSTi, RMSTc");
  simulate->add_option("--out", sa.out, "Directory for TSV/JSON reports");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  try {
    if (*analyze) return run_analyze(aa);
    return run_simulate(sa, *simulate);
  } catch (const rmtl::InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const rmtl::DegenerateError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDegenerate;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDegenerate;
  }
}
