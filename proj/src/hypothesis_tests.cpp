#include "rmtl/hypothesis_tests.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include <boost/math/distributions/normal.hpp>

#include "rmtl/error.hpp"
#include "rmtl/estimators.hpp"
#include "rmtl/two_group_kernel.hpp"

namespace rmtl {

namespace {

constexpr std::array<std::string_view, 8> kMethodNames = {
    "Gray", "Diff", "PComb", "FComb", "TComb", "Diff*", "RMSTi", "RMSTc"};

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InputError("alpha must be in (0, 1)");
}

double two_sided_p(double z) { return std::erfc(std::abs(z) / std::sqrt(2.0)); }

// Z test on a difference with known standard error.
TestOutcome z_test(Method method, double difference, double variance, double alpha,
                   std::string label, double tau) {
  TestOutcome out;
  out.method = method;
  out.meta.tau = tau;
  if (variance <= 0.0) {
    if (difference != 0.0) throw DegenerateError("degenerate variance");
    out.statistic = 0.0;
    out.p_value = 1.0;
    out.effect = Effect{difference, difference, difference, std::move(label)};
    return out;
  }
  const double se = std::sqrt(variance);
  out.statistic = difference / se;
  out.p_value = two_sided_p(out.statistic);
  const double half = two_sided_critical_value(alpha) * se;
  out.effect = Effect{difference, difference - half, difference + half, std::move(label)};
  return out;
}

double permutation_p(std::size_t extreme, std::size_t total) {
  return (1.0 + static_cast<double>(extreme)) / (static_cast<double>(total) + 1.0);
}

double fisher_statistic(const PValuePair& p) {
  return -2.0 * (std::log(std::max(p.gray, kMinLogP)) + std::log(std::max(p.diff, kMinLogP)));
}

void attach_permutation_meta(TestOutcome& out, const PermutedPValues& draws) {
  out.meta.permutations_used = draws.permuted.size();
  out.meta.permutations_invalid = draws.invalid;
}

}  // namespace

std::string_view method_name(Method m) { return kMethodNames[static_cast<std::size_t>(m)]; }

Method method_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kMethodNames.size(); ++i) {
    if (kMethodNames[i] == name) return static_cast<Method>(i);
  }
  if (name == "DiffStar") return Method::DiffStar;
  throw InputError("unknown method " + std::string(name));
}

double two_sided_critical_value(double alpha) {
  check_alpha(alpha);
  static const boost::math::normal_distribution<double> standard;
  return boost::math::quantile(boost::math::complement(standard, alpha / 2.0));
}

double stage_one_level(double alpha) {
  check_alpha(alpha);
  return 1.0 - std::sqrt(1.0 - alpha);
}

TestOutcome gray_test(const Sample& sample) {
  require_two_groups(sample);
  const TwoGroupKernel kernel(sample);
  const auto labels = sample.group_labels();
  const KernelResult r = kernel.evaluate(labels, sample.max_time());
  if (!r.gray.valid) {
    if (r.gray.variance == 0.0 && r.gray.score != 0.0) {
      throw DegenerateError("Gray test variance is zero");
    }
    throw InputError("no events of interest");
  }
  TestOutcome out;
  out.method = Method::Gray;
  out.statistic = r.gray.statistic;
  out.p_value = r.gray.p_value;
  return out;
}

namespace {

void check_group_tau(const Sample& sample, double tau) {
  if (!(tau > 0.0) || tau > sample.subset(1).max_time() || tau > sample.subset(2).max_time()) {
    throw InputError("invalid tau");
  }
}

}  // namespace

TestOutcome diff_test(const Sample& sample, double tau, double alpha) {
  require_two_groups(sample);
  check_alpha(alpha);
  check_group_tau(sample, tau);
  std::array<RmtlEstimate, 2> est;
  for (int g : {1, 2}) {
    est[g - 1] = rmtl(aalen_johansen(sample.subset(g), 1), tau);
  }
  const double variance = est[0].per_subject_variance / static_cast<double>(est[0].n) +
                          est[1].per_subject_variance / static_cast<double>(est[1].n);
  auto out = z_test(Method::Diff, est[0].point - est[1].point, variance, alpha,
                    "RMTL difference (group 1 - group 2)", tau);
  for (const auto& e : est) {
    if (e.variance_clamped) out.meta.warnings.emplace_back("negative RMTL variance clamped to 0");
  }
  return out;
}

TestOutcome diff_star_test(const Sample& sample, double tau, double alpha) {
  require_two_groups(sample);
  check_alpha(alpha);
  check_group_tau(sample, tau);
  const RcEstimate a = rc(sample.subset(1), tau);
  const RcEstimate b = rc(sample.subset(2), tau);
  const double variance = a.per_subject_variance / static_cast<double>(a.n) +
                          b.per_subject_variance / static_cast<double>(b.n);
  return z_test(Method::DiffStar, a.point - b.point, variance, alpha,
                "RC difference (group 1 - group 2)", tau);
}

TestOutcome rmst_diff_test(const Sample& sample, double tau, double alpha, RmstVariant variant) {
  require_two_groups(sample);
  check_alpha(alpha);
  check_group_tau(sample, tau);
  const EventSet events = variant == RmstVariant::Interest ? kInterestOnly : kAllEvents;
  std::array<RmstEstimate, 2> est;
  for (int g : {1, 2}) {
    const Sample part = sample.subset(g);
    const auto terms = risk_terms(part, events);
    est[g - 1] = rmst_from_survival(kaplan_meier(part, events), tau, terms, part.size());
  }
  const bool interest = variant == RmstVariant::Interest;
  auto out = z_test(interest ? Method::RMSTi : Method::RMSTc, est[0].point - est[1].point,
                    est[0].variance_of_point + est[1].variance_of_point, alpha,
                    interest ? "RMSTi difference (group 1 - group 2)"
                             : "RMSTc difference (group 1 - group 2)",
                    tau);
  for (const auto& e : est) {
    if (e.unstable_variance) out.meta.warnings.emplace_back("unstable Greenwood variance");
  }
  return out;
}

PermutedPValues permuted_p_values(const Sample& sample, double tau, const PermutationPlan& plan) {
  require_two_groups(sample);
  validate(plan);
  const TwoGroupKernel kernel(sample);
  const auto base = sample.group_labels();

  PermutedPValues out;
  const KernelResult observed = kernel.evaluate(base, tau);
  if (!observed.gray.valid) throw InputError("no events of interest");
  if (!observed.diff.valid) {
    if (tau > sample.subset(1).max_time() || tau > sample.subset(2).max_time() || tau <= 0.0) {
      throw InputError("invalid tau");
    }
    throw DegenerateError("degenerate variance");
  }
  out.observed = {observed.gray.p_value, observed.diff.p_value};

  const std::optional<double> perm_tau =
      plan.tau_mode == TauMode::Fixed ? std::optional<double>(tau) : std::nullopt;
  std::vector<PValuePair> draws(plan.count);
  std::vector<char> ok(plan.count, 0);
  parallel_for(plan.count, plan.threads, [&](std::size_t b) {
    thread_local TwoGroupKernel::Workspace ws;
    const auto labels = permuted_labels(base, plan.seed, b);
    const KernelResult r = kernel.evaluate(labels, perm_tau, ws);
    if (r.gray.valid && r.diff.valid) {
      draws[b] = {r.gray.p_value, r.diff.p_value};
      ok[b] = 1;
    }
  });
  for (std::size_t b = 0; b < plan.count; ++b) {
    if (ok[b]) {
      out.permuted.push_back(draws[b]);
    } else {
      ++out.invalid;
    }
  }
  if (static_cast<double>(out.invalid) > kMaxInvalidFraction * static_cast<double>(plan.count)) {
    throw DegenerateError("more than 10% of permutations could not be evaluated");
  }
  return out;
}

TestOutcome combine_min_p(const PermutedPValues& draws) {
  TestOutcome out;
  out.method = Method::PComb;
  const double m = std::min(draws.observed.gray, draws.observed.diff);
  std::size_t extreme = 0;
  for (const auto& p : draws.permuted) {
    if (std::min(p.gray, p.diff) <= m) ++extreme;
  }
  out.statistic = m;
  out.p_value = permutation_p(extreme, draws.permuted.size());
  attach_permutation_meta(out, draws);
  return out;
}

TestOutcome combine_fisher(const PermutedPValues& draws) {
  TestOutcome out;
  out.method = Method::FComb;
  const double f = fisher_statistic(draws.observed);
  std::size_t extreme = 0;
  for (const auto& p : draws.permuted) {
    if (fisher_statistic(p) >= f) ++extreme;
  }
  out.statistic = f;
  out.p_value = permutation_p(extreme, draws.permuted.size());
  attach_permutation_meta(out, draws);
  return out;
}

TestOutcome combine_two_stage(const PermutedPValues& draws, double alpha) {
  TestOutcome out;
  out.method = Method::TComb;
  const double level = stage_one_level(alpha);
  out.meta.stage_one_level = level;
  attach_permutation_meta(out, draws);
  const double p1 = draws.observed.gray;
  if (p1 <= level) {
    out.statistic = p1;
    out.p_value = p1;
    out.meta.stage = 1;
    return out;
  }
  // Conditional permutation P-value of Diff among relabellings that Gray
  // does not reject at the stage-one level.
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  for (const auto& p : draws.permuted) {
    if (p.gray > level) {
      ++accepted;
      if (p.diff <= draws.observed.diff) ++rejected;
    }
  }
  double q = 1.0;
  if (accepted == 0) {
    out.meta.warnings.emplace_back("no permutation passed stage one; conditional rate set to 1");
  } else {
    q = static_cast<double>(rejected) / static_cast<double>(accepted);
  }
  out.statistic = draws.observed.diff;
  out.p_value = std::min(1.0, level + q * (1.0 - level));
  out.meta.stage = 2;
  return out;
}

TestOutcome pcomb_test(const Sample& sample, double tau, const PermutationPlan& plan) {
  return combine_min_p(permuted_p_values(sample, tau, plan));
}

TestOutcome fcomb_test(const Sample& sample, double tau, const PermutationPlan& plan) {
  return combine_fisher(permuted_p_values(sample, tau, plan));
}

TestOutcome tcomb_test(const Sample& sample, double tau, double alpha,
                       const PermutationPlan& plan) {
  check_alpha(alpha);
  return combine_two_stage(permuted_p_values(sample, tau, plan), alpha);
}

CombinedOutcomes combined_tests(const Sample& sample, double tau, double alpha,
                                const PermutationPlan& plan) {
  check_alpha(alpha);
  const PermutedPValues draws = permuted_p_values(sample, tau, plan);
  return {combine_min_p(draws), combine_fisher(draws), combine_two_stage(draws, alpha)};
}

}  // namespace rmtl
