#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rmtl/hypothesis_tests.hpp"
#include "rmtl/permutation.hpp"
#include "rmtl/rng.hpp"
#include "rmtl/sample.hpp"

namespace rmtl {

// A: identical CIFs.  B: proportional subdistribution hazards.
// C: late difference.  D: early difference.
enum class Scenario { A, B, C, D };

char scenario_letter(Scenario s);
Scenario scenario_from_letter(std::string_view s);

// Pooled: one U(0, b) bound shared by both groups, hitting the target
// censored fraction over the pooled sample.  PerGroup: each group hits the
// target on its own.
enum class CensoringMode { Pooled, PerGroup };

std::string_view censoring_mode_name(CensoringMode m);
CensoringMode censoring_mode_from_name(std::string_view s);

struct ScenarioConfig {
  Scenario scenario = Scenario::A;
  std::size_t n1 = 100;
  std::size_t n2 = 100;
  double target_censoring = 0.0;
  CensoringMode censoring_mode = CensoringMode::Pooled;
  double p1 = 0.7;
  // Scenario B only; defaults to ln 2 when left unset.
  std::optional<double> beta;
  std::size_t replications = 5000;
  std::size_t permutations = 200;
  double alpha = 0.05;
  std::uint64_t seed = 1;
  unsigned threads = 0;
  TauMode tau_mode = TauMode::Recompute;
  // Also score Diff*, RMSTi and RMSTc in each replicate.
  bool include_composite = false;

  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

inline constexpr double kDefaultBeta = 0.69314718055994530942;

// Throws InputError for out-of-domain parameters; fills in the default beta.
ScenarioConfig validated(ScenarioConfig config);

struct EventDraw {
  double time = 0.0;
  int type = 1;
};

// One latent event (time, cause) for a subject in `group` (1 or 2).
EventDraw sample_event(Scenario scenario, int group, const ScenarioConfig& config, Rng& rng);

// Analytic cumulative incidence of cause `type` at time t.
double true_cif(Scenario scenario, int group, int type, double t, const ScenarioConfig& config);

// Upper bound of U(0, bound) censoring giving the target censored fraction
// for one group.  Target 0 returns +inf (no censoring).  Results are cached.
double calibrate_censoring_bound(Scenario scenario, int group, const ScenarioConfig& config,
                                 double target);

// Common bound for both groups; the target is met by the n-weighted mixture.
double calibrate_pooled_censoring_bound(const ScenarioConfig& config, double target);

inline constexpr std::size_t kCalibrationDraws = 100000;
inline constexpr std::uint64_t kCalibrationSeed = 0x5eed0ca1b7a7e5ULL;
inline constexpr double kCalibrationTolerance = 0.005;

struct CensoringBounds {
  double group1 = 0.0;
  double group2 = 0.0;
};

CensoringBounds censoring_bounds(const ScenarioConfig& config);

Sample simulate_dataset(const ScenarioConfig& config, Rng& rng);
Sample simulate_dataset(const ScenarioConfig& config, const CensoringBounds& bounds, Rng& rng);

struct MonteCarloReport {
  ScenarioConfig config;
  CensoringBounds bounds;
  std::vector<Method> methods;
  std::map<Method, double> rejection_rate;
  std::map<Method, double> mean_abs_deviation;
  std::size_t valid_replicates = 0;
  std::size_t regenerated = 0;
  double realized_censoring = 0.0;
  double wall_time = 0.0;
  std::vector<std::string> warnings;

  double mc_stderr(Method m) const;
};

MonteCarloReport run_monte_carlo(const ScenarioConfig& config);

// Per method, mean over null-scenario reports of |rate - alpha|.
std::map<Method, double> summarize_deviation(const std::vector<MonteCarloReport>& reports);

// Gray-only rejection rate, used for effect-size calibration.  Replicate i
// draws from the same stream for every beta so the curve is smooth in beta.
double gray_power(const ScenarioConfig& config);

struct BetaCalibration {
  double beta = 0.0;
  double achieved_power = 0.0;
};

// Searches scenario-B beta so Gray's power at `config` hits target_power.
BetaCalibration calibrate_beta(ScenarioConfig config, double target_power,
                               double tolerance = 0.02);

// The (n1, n2) pairs and censoring targets of the standard grid.
std::vector<std::pair<std::size_t, std::size_t>> grid_sizes();
std::vector<double> grid_censoring();

std::vector<MonteCarloReport> run_grid(const ScenarioConfig& base);

}  // namespace rmtl
