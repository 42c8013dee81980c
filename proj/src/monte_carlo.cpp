#include <algorithm>
#include <chrono>
#include <cmath>

#include "rmtl/error.hpp"
#include "rmtl/estimators.hpp"
#include "rmtl/simulation.hpp"

namespace rmtl {

namespace {

// Seed streams within one replicate.
constexpr std::uint64_t kDataStream = 1;
constexpr std::uint64_t kPermutationStream = 2;
constexpr std::size_t kMaxRegenerationAttempts = 1000;

struct ReplicateOutcome {
  bool valid = false;
  std::size_t regenerated = 0;
  double censored_fraction = 0.0;
  std::vector<char> rejected;
};

// Draws a dataset whose tau is defined, counting the redraws needed.
Sample draw_usable(const ScenarioConfig& c, const CensoringBounds& bounds, std::size_t replicate,
                   std::size_t& attempts, double& tau) {
  for (attempts = 0; attempts < kMaxRegenerationAttempts; ++attempts) {
    Rng rng(derive_seed(c.seed, replicate, kDataStream, attempts));
    Sample sample = simulate_dataset(c, bounds, rng);
    try {
      tau = select_tau(sample);
      return sample;
    } catch (const InputError&) {
    }
  }
  throw DegenerateError("could not draw a dataset with tau defined");
}

ReplicateOutcome run_replicate(const ScenarioConfig& c, const CensoringBounds& bounds,
                               const std::vector<Method>& methods, std::size_t replicate) {
  ReplicateOutcome out;
  out.rejected.assign(methods.size(), 0);
  double tau = 0.0;
  const Sample sample = draw_usable(c, bounds, replicate, out.regenerated, tau);
  std::size_t censored = 0;
  for (const auto& r : sample.records()) censored += r.status == Status::Censored;
  out.censored_fraction = static_cast<double>(censored) / static_cast<double>(sample.size());

  PermutationPlan plan;
  plan.count = c.permutations;
  plan.seed = derive_seed(c.seed, replicate, kPermutationStream, out.regenerated);
  plan.threads = 1;
  plan.tau_mode = c.tau_mode;

  PermutedPValues draws;
  try {
    draws = permuted_p_values(sample, tau, plan);
  } catch (const std::runtime_error&) {
    return out;
  }
  const double alpha = c.alpha;
  for (std::size_t m = 0; m < methods.size(); ++m) {
    double p = 1.0;
    switch (methods[m]) {
      case Method::Gray: p = draws.observed.gray; break;
      case Method::Diff: p = draws.observed.diff; break;
      case Method::PComb: p = combine_min_p(draws).p_value; break;
      case Method::FComb: p = combine_fisher(draws).p_value; break;
      case Method::TComb: p = combine_two_stage(draws, alpha).p_value; break;
      case Method::DiffStar: p = diff_star_test(sample, tau, alpha).p_value; break;
      case Method::RMSTi: p = rmst_diff_test(sample, tau, alpha, RmstVariant::Interest).p_value; break;
      case Method::RMSTc: p = rmst_diff_test(sample, tau, alpha, RmstVariant::Composite).p_value; break;
    }
    out.rejected[m] = p <= alpha;
  }
  out.valid = true;
  return out;
}

}  // namespace

double MonteCarloReport::mc_stderr(Method m) const {
  const auto it = rejection_rate.find(m);
  if (it == rejection_rate.end() || valid_replicates == 0) return 0.0;
  const double r = it->second;
  return std::sqrt(r * (1.0 - r) / static_cast<double>(valid_replicates));
}

MonteCarloReport run_monte_carlo(const ScenarioConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  MonteCarloReport report;
  report.config = validated(config);
  const ScenarioConfig& c = report.config;
  report.bounds = censoring_bounds(c);
  report.methods = {Method::Gray, Method::Diff, Method::PComb, Method::FComb, Method::TComb};
  if (c.include_composite) {
    report.methods.insert(report.methods.end(), {Method::DiffStar, Method::RMSTi, Method::RMSTc});
  }

  std::vector<ReplicateOutcome> outcomes(c.replications);
  parallel_for(c.replications, c.threads, [&](std::size_t r) {
    outcomes[r] = run_replicate(c, report.bounds, report.methods, r);
  });

  std::vector<std::size_t> rejections(report.methods.size(), 0);
  double censored = 0.0;
  for (const auto& o : outcomes) {
    report.regenerated += o.regenerated;
    censored += o.censored_fraction;
    if (!o.valid) continue;
    ++report.valid_replicates;
    for (std::size_t m = 0; m < rejections.size(); ++m) rejections[m] += o.rejected[m];
  }
  report.realized_censoring = censored / static_cast<double>(c.replications);

  const double regenerated_fraction =
      static_cast<double>(report.regenerated) / static_cast<double>(c.replications);
  if (regenerated_fraction > 0.10) {
    throw DegenerateError("more than 10% of replicates had to be regenerated");
  }
  if (regenerated_fraction > 0.01) {
    report.warnings.emplace_back("more than 1% of replicates regenerated (tau undefined)");
  }
  if (report.valid_replicates < c.replications) {
    report.warnings.emplace_back(std::to_string(c.replications - report.valid_replicates) +
                                 " replicates failed permutation evaluation");
  }
  for (std::size_t m = 0; m < report.methods.size(); ++m) {
    const double rate = report.valid_replicates == 0
                            ? 0.0
                            : static_cast<double>(rejections[m]) /
                                  static_cast<double>(report.valid_replicates);
    report.rejection_rate[report.methods[m]] = rate;
    if (c.scenario == Scenario::A) {
      report.mean_abs_deviation[report.methods[m]] = std::abs(rate - c.alpha);
    }
  }
  report.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

std::map<Method, double> summarize_deviation(const std::vector<MonteCarloReport>& reports) {
  if (reports.empty()) throw InputError("no reports to summarize");
  std::map<Method, double> total;
  std::map<Method, std::size_t> cells;
  for (const auto& r : reports) {
    if (r.config.scenario != Scenario::A) {
      throw InputError("deviation summaries require null (scenario A) reports");
    }
    for (const auto& [method, rate] : r.rejection_rate) {
      total[method] += std::abs(rate - r.config.alpha);
      ++cells[method];
    }
  }
  for (auto& [method, sum] : total) sum /= static_cast<double>(cells[method]);
  return total;
}

double gray_power(const ScenarioConfig& config) {
  const ScenarioConfig c = validated(config);
  const CensoringBounds bounds = censoring_bounds(c);
  std::vector<char> rejected(c.replications, 0);
  parallel_for(c.replications, c.threads, [&](std::size_t r) {
    std::size_t attempts = 0;
    double tau = 0.0;
    const Sample sample = draw_usable(c, bounds, r, attempts, tau);
    rejected[r] = gray_test(sample).p_value <= c.alpha;
  });
  const auto hits = std::count(rejected.begin(), rejected.end(), 1);
  return static_cast<double>(hits) / static_cast<double>(c.replications);
}

BetaCalibration calibrate_beta(ScenarioConfig config, double target_power, double tolerance) {
  if (config.scenario != Scenario::B) throw InputError("beta calibration needs scenario B");
  if (!(target_power > config.alpha && target_power < 1.0)) {
    throw InputError("target power must lie between alpha and 1");
  }
  auto power_at = [&](double beta) {
    config.beta = beta;
    return gray_power(config);
  };
  double lo = 0.0;
  double hi = 1.0;
  while (power_at(hi) < target_power) {
    hi *= 2.0;
    if (hi > 64.0) throw InputError("target power unattainable");
  }
  BetaCalibration best{hi, power_at(hi)};
  for (int i = 0; i < 30; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double p = power_at(mid);
    if (std::abs(p - target_power) < std::abs(best.achieved_power - target_power)) {
      best = {mid, p};
    }
    (p < target_power ? lo : hi) = mid;
    if (hi - lo < 1e-4) break;
  }
  if (std::abs(best.achieved_power - target_power) > tolerance) {
    throw DegenerateError("beta calibration did not reach the target power");
  }
  return best;
}

std::vector<MonteCarloReport> run_grid(const ScenarioConfig& base) {
  std::vector<MonteCarloReport> out;
  for (const auto& [n1, n2] : grid_sizes()) {
    for (double cens : grid_censoring()) {
      ScenarioConfig c = base;
      c.n1 = n1;
      c.n2 = n2;
      c.target_censoring = cens;
      out.push_back(run_monte_carlo(c));
    }
  }
  return out;
}

}  // namespace rmtl
