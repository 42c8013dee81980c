#include "rmtl/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <tuple>

#include "rmtl/error.hpp"

namespace rmtl {

namespace {

// Weibull shape on [0, 2] and (2, inf) for the piecewise scenarios.
struct PiecewiseShape {
  double early = 2.0;
  double late = 2.0;
};

PiecewiseShape piecewise_shape(Scenario s, int group) {
  const double slow = 0.1;
  const double fast = 4.0;
  if (s == Scenario::C) return {2.0, group == 1 ? slow : fast};
  return {group == 1 ? slow : fast, 2.0};
}

double beta_of(const ScenarioConfig& c) { return c.beta.value_or(kDefaultBeta); }

// Probability that a subject's event is the event of interest.
double interest_probability(Scenario s, int group, const ScenarioConfig& c) {
  if (s == Scenario::B && group == 2) {
    return 1.0 - std::pow(1.0 - c.p1, std::exp(beta_of(c)));
  }
  return c.p1;
}

// Conditional CDF 1 - exp(-(t/2)^A) with A switching at t = 2.
double piecewise_cdf(const PiecewiseShape& shape, double t) {
  const double a = t <= 2.0 ? shape.early : shape.late;
  return 1.0 - std::exp(-std::pow(t / 2.0, a));
}

double piecewise_quantile(const PiecewiseShape& shape, double u) {
  const double knee = 1.0 - std::exp(-1.0);
  const double a = u <= knee ? shape.early : shape.late;
  return 2.0 * std::pow(-std::log1p(-u), 1.0 / a);
}

}  // namespace

char scenario_letter(Scenario s) { return static_cast<char>('A' + static_cast<int>(s)); }

Scenario scenario_from_letter(std::string_view s) {
  if (s.size() == 1) {
    const char c = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
    if (c >= 'A' && c <= 'D') return static_cast<Scenario>(c - 'A');
  }
  throw InputError("unknown scenario '" + std::string(s) + "' (expected A, B, C or D)");
}

std::string_view censoring_mode_name(CensoringMode m) {
  return m == CensoringMode::Pooled ? "pooled" : "per_group";
}

CensoringMode censoring_mode_from_name(std::string_view s) {
  if (s == "pooled") return CensoringMode::Pooled;
  if (s == "per_group" || s == "per-group") return CensoringMode::PerGroup;
  throw InputError("unknown censoring mode '" + std::string(s) + "' (expected pooled or per_group)");
}

ScenarioConfig validated(ScenarioConfig c) {
  if (c.n1 < 1 || c.n2 < 1) throw InputError("group sizes must be positive");
  if (!(c.target_censoring >= 0.0 && c.target_censoring < 0.9)) {
    throw InputError("censoring target must be in [0, 0.9)");
  }
  if (!(c.p1 > 0.0 && c.p1 < 1.0)) throw InputError("p1 must be in (0, 1)");
  if (c.replications < 1) throw InputError("replications must be at least 1");
  if (c.permutations < 1) throw InputError("permutation count must be at least 1");
  if (!(c.alpha > 0.0 && c.alpha < 1.0)) throw InputError("alpha must be in (0, 1)");
  if (c.scenario == Scenario::B) {
    if (!c.beta) c.beta = kDefaultBeta;
    if (!std::isfinite(*c.beta)) throw InputError("beta must be finite");
  } else if (c.beta) {
    throw InputError("beta applies only to scenario B");
  }
  return c;
}

EventDraw sample_event(Scenario s, int group, const ScenarioConfig& c, Rng& rng) {
  const double u_type = uniform_open(rng);
  const double u_time = uniform_open(rng);
  const double pi1 = interest_probability(s, group, c);
  EventDraw draw;
  draw.type = u_type < pi1 ? 1 : 2;
  switch (s) {
    case Scenario::A:
      draw.time = -std::log1p(-u_time);
      break;
    case Scenario::B: {
      if (group == 1) {
        draw.time = -std::log1p(-u_time);
        break;
      }
      const double e = std::exp(beta_of(c));
      if (draw.type == 1) {
        // Invert I1(t) / pi1 with I1(t) = 1 - [1 - p1 (1 - e^-t)]^e.
        const double inner = 1.0 - std::pow(1.0 - u_time * pi1, 1.0 / e);
        draw.time = -std::log1p(-std::min(inner / c.p1, 1.0 - 1e-16));
      } else {
        draw.time = -std::log1p(-u_time) / e;
      }
      break;
    }
    case Scenario::C:
    case Scenario::D:
      draw.time = piecewise_quantile(piecewise_shape(s, group), u_time);
      break;
  }
  return draw;
}

double true_cif(Scenario s, int group, int type, double t, const ScenarioConfig& c) {
  const double p1 = c.p1;
  switch (s) {
    case Scenario::A:
      return (type == 1 ? p1 : 1.0 - p1) * (1.0 - std::exp(-t));
    case Scenario::B: {
      const double e = group == 2 ? std::exp(beta_of(c)) : 1.0;
      if (type == 1) return 1.0 - std::pow(1.0 - p1 * (1.0 - std::exp(-t)), e);
      return std::pow(1.0 - p1, e) * (1.0 - std::exp(-t * e));
    }
    case Scenario::C:
    case Scenario::D:
      return (type == 1 ? p1 : 1.0 - p1) * piecewise_cdf(piecewise_shape(s, group), t);
  }
  return 0.0;
}

namespace {

std::vector<double> calibration_times(Scenario s, int group, const ScenarioConfig& c) {
  Rng rng(derive_seed(kCalibrationSeed, static_cast<std::uint64_t>(s),
                      static_cast<std::uint64_t>(group)));
  std::vector<double> times(kCalibrationDraws);
  for (auto& t : times) t = sample_event(s, group, c, rng).time;
  return times;
}

// P(C < T | T) = min(T / bound, 1) for C ~ U(0, bound).
double censored_fraction(const std::vector<double>& times, double bound) {
  double total = 0.0;
  for (double t : times) total += std::min(t / bound, 1.0);
  return total / static_cast<double>(times.size());
}

template <class Rate>
double solve_bound(Rate rate, double target) {
  double lo = 1.0;
  double hi = 1.0;
  for (int i = 0; rate(hi) > target; ++i) {
    if (i > 200) throw InputError("censoring target unattainable");
    hi *= 2.0;
  }
  for (int i = 0; rate(lo) < target; ++i) {
    if (i > 200) throw InputError("censoring target unattainable");
    lo /= 2.0;
  }
  for (int i = 0; i < 200 && hi - lo > 1e-12 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (rate(mid) > target ? lo : hi) = mid;
  }
  const double bound = 0.5 * (lo + hi);
  if (std::abs(rate(bound) - target) > kCalibrationTolerance) {
    throw InputError("censoring target unattainable");
  }
  return bound;
}

using BoundKey = std::tuple<int, int, double, double, double, double>;
std::mutex bound_mutex;
std::map<BoundKey, double> bound_cache;

template <class Solve>
double cached_bound(const BoundKey& key, Solve solve) {
  {
    std::lock_guard lock(bound_mutex);
    if (auto it = bound_cache.find(key); it != bound_cache.end()) return it->second;
  }
  const double bound = solve();
  std::lock_guard lock(bound_mutex);
  bound_cache.emplace(key, bound);
  return bound;
}

void check_target(double target) {
  if (!(target >= 0.0 && target < 0.9)) throw InputError("censoring target must be in [0, 0.9)");
}

}  // namespace

double calibrate_censoring_bound(Scenario s, int group, const ScenarioConfig& c, double target) {
  check_target(target);
  if (group != 1 && group != 2) throw InputError("group must be 1 or 2");
  if (target == 0.0) return std::numeric_limits<double>::infinity();
  const double beta = s == Scenario::B ? beta_of(c) : 0.0;
  return cached_bound({static_cast<int>(s), group, target, c.p1, beta, 0.0}, [&] {
    const auto times = calibration_times(s, group, c);
    return solve_bound([&](double b) { return censored_fraction(times, b); }, target);
  });
}

double calibrate_pooled_censoring_bound(const ScenarioConfig& c, double target) {
  check_target(target);
  if (target == 0.0) return std::numeric_limits<double>::infinity();
  const Scenario s = c.scenario;
  const double beta = s == Scenario::B ? beta_of(c) : 0.0;
  const double w1 = static_cast<double>(c.n1) / static_cast<double>(c.n1 + c.n2);
  return cached_bound({static_cast<int>(s), 0, target, c.p1, beta, w1}, [&] {
    const auto t1 = calibration_times(s, 1, c);
    const auto t2 = calibration_times(s, 2, c);
    return solve_bound(
        [&](double b) {
          return w1 * censored_fraction(t1, b) + (1.0 - w1) * censored_fraction(t2, b);
        },
        target);
  });
}

CensoringBounds censoring_bounds(const ScenarioConfig& c) {
  if (c.censoring_mode == CensoringMode::Pooled) {
    const double b = calibrate_pooled_censoring_bound(c, c.target_censoring);
    return {b, b};
  }
  return {calibrate_censoring_bound(c.scenario, 1, c, c.target_censoring),
          calibrate_censoring_bound(c.scenario, 2, c, c.target_censoring)};
}

Sample simulate_dataset(const ScenarioConfig& config, Rng& rng) {
  return simulate_dataset(config, censoring_bounds(config), rng);
}

Sample simulate_dataset(const ScenarioConfig& c, const CensoringBounds& bounds, Rng& rng) {
  std::vector<SurvRecord> records;
  records.reserve(c.n1 + c.n2);
  for (int group : {1, 2}) {
    const std::size_t n = group == 1 ? c.n1 : c.n2;
    const double bound = group == 1 ? bounds.group1 : bounds.group2;
    for (std::size_t i = 0; i < n; ++i) {
      const EventDraw e = sample_event(c.scenario, group, c, rng);
      const double cens = std::isinf(bound) ? bound : uniform_open(rng) * bound;
      SurvRecord r;
      r.group = group;
      if (e.time <= cens) {
        r.time = e.time;
        r.status = e.type == 1 ? Status::Interest : Status::Competing;
      } else {
        r.time = cens;
        r.status = Status::Censored;
      }
      records.push_back(r);
    }
  }
  return Sample(std::move(records));
}

std::vector<std::pair<std::size_t, std::size_t>> grid_sizes() {
  return {{50, 50}, {100, 100}, {150, 150}, {50, 100}, {50, 150}, {50, 200}};
}

std::vector<double> grid_censoring() { return {0.0, 0.15, 0.30, 0.45, 0.60}; }

}  // namespace rmtl
