#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "doctest.h"
#include "helpers.hpp"
#include "rmtl/estimators.hpp"
#include "rmtl/hypothesis_tests.hpp"
#include "rmtl/permutation.hpp"
#include "rmtl/two_group_kernel.hpp"

using namespace rmtl;

namespace {

struct Obs {
  double time;
  int status;
};

// Censoring survivor G(t) by direct product over censoring times, with the
// events at a tied time leaving the risk set first.
double censoring_survival(const std::vector<Obs>& g, double t, bool left) {
  std::set<double> times;
  for (const auto& o : g) {
    if (o.status == 0) times.insert(o.time);
  }
  double s = 1.0;
  for (double c : times) {
    if (left ? c >= t : c > t) break;
    double at_risk = 0, censored = 0;
    for (const auto& o : g) {
      if (o.time > c || (o.time == c && o.status == 0)) at_risk += 1;
      if (o.time == c && o.status == 0) censored += 1;
    }
    s *= 1.0 - censored / at_risk;
  }
  return s;
}

// Gray's rho = 0 score with inverse-probability-of-censoring weighted risk
// sets: subjects with a competing event stay in with weight G(t-)/G(X-).
double ipcw_gray_score(const Sample& sample) {
  std::vector<Obs> grp[2];
  for (const auto& r : sample.records()) grp[r.group - 1].push_back({r.time, status_code(r.status)});
  std::set<double> event_times;
  for (const auto& r : sample.records()) {
    if (r.status == Status::Interest) event_times.insert(r.time);
  }
  double score = 0.0;
  for (double t : event_times) {
    double risk[2] = {0, 0}, d[2] = {0, 0};
    for (int g = 0; g < 2; ++g) {
      const double gt = censoring_survival(grp[g], t, true);
      for (const auto& o : grp[g]) {
        if (o.time >= t) risk[g] += 1.0;
        else if (o.status == 2) risk[g] += gt / censoring_survival(grp[g], o.time, true);
        if (o.time == t && o.status == 1) d[g] += 1.0;
      }
    }
    if (risk[0] <= 0.0 || risk[1] <= 0.0) continue;
    const double k = risk[0] * risk[1] / (risk[0] + risk[1]);
    score += k * (d[0] / risk[0] - d[1] / risk[1]);
  }
  return score;
}

}  // namespace

TEST_CASE("Gray score equals the IPCW risk-set score") {
  std::mt19937_64 rng(31);
  for (int rep = 0; rep < 60; ++rep) {
    const double grid = rep % 3 == 0 ? 0.1 : 0.0;
    const Sample s = testing::random_sample(rng, 15 + rep % 20, 20 + rep % 7, 3.0, grid);
    const TwoGroupKernel kernel(s);
    const auto r = kernel.evaluate(s.group_labels(), s.max_time());
    REQUIRE(r.gray.valid);
    const double oracle = ipcw_gray_score(s);
    CHECK(r.gray.score == doctest::Approx(oracle).epsilon(1e-10).scale(1.0));
    CHECK(r.gray.statistic == doctest::Approx(r.gray.score * r.gray.score / r.gray.variance));
    CHECK(r.gray.p_value ==
          doctest::Approx(std::erfc(std::sqrt(r.gray.statistic) / std::sqrt(2.0))).epsilon(1e-14));
  }
}

TEST_CASE("kernel RMTL difference matches the estimator route") {
  std::mt19937_64 rng(37);
  for (int rep = 0; rep < 60; ++rep) {
    const Sample s = testing::random_sample(rng, 25, 35, 3.0, rep % 2 ? 0.05 : 0.0);
    const double tau = select_tau(s);
    const TwoGroupKernel kernel(s);
    const auto r = kernel.evaluate(s.group_labels(), tau);
    REQUIRE(r.diff.valid);
    const auto d = diff_test(s, tau);
    for (int g : {1, 2}) {
      const auto est = rmtl::rmtl(aalen_johansen(s.subset(g), 1), tau);
      CHECK(r.diff.rmtl[g - 1] == doctest::Approx(est.point).epsilon(1e-13));
      CHECK(r.diff.per_subject_variance[g - 1] ==
            doctest::Approx(est.per_subject_variance).epsilon(1e-12));
    }
    CHECK(r.diff.z == doctest::Approx(d.statistic).epsilon(1e-12));
    CHECK(r.diff.p_value == doctest::Approx(d.p_value).epsilon(1e-12));
  }
}

TEST_CASE("kernel on a relabelling equals a fresh evaluation of the relabelled sample") {
  std::mt19937_64 rng(41);
  const Sample s = testing::random_sample(rng, 40, 40, 3.0, 0.05);
  const TwoGroupKernel kernel(s);
  const auto base = s.group_labels();
  for (std::uint64_t b = 0; b < 30; ++b) {
    const auto labels = permuted_labels(base, 99, b);
    const Sample relabeled = s.relabeled(labels);
    const auto r = kernel.evaluate(labels);
    const auto fresh = TwoGroupKernel(relabeled).evaluate(relabeled.group_labels());
    CHECK(r.gray.score == fresh.gray.score);
    CHECK(r.gray.variance == fresh.gray.variance);
    if (r.diff.valid) {
      CHECK(r.diff.tau == select_tau(relabeled));
      CHECK(r.diff.p_value == fresh.diff.p_value);
    }
  }
}

TEST_CASE("kernel flags labellings without events of interest in a group") {
  const auto s = testing::make_sample({{1, 1, 1}, {2, 2, 2}, {3, 0, 2}, {4, 1, 1}});
  const TwoGroupKernel kernel(s);
  const auto r = kernel.evaluate(s.group_labels());
  CHECK_FALSE(r.diff.valid);
}

TEST_CASE("identical groups give a zero score") {
  std::mt19937_64 rng(43);
  const Sample one = testing::random_sample(rng, 30, 0, 3.0);
  std::vector<SurvRecord> both;
  for (const auto& r : one.records()) {
    both.push_back(r);
    both.push_back({r.time, r.status, 2});
  }
  const Sample s(both);
  const auto r = TwoGroupKernel(s).evaluate(s.group_labels());
  CHECK(r.gray.score == 0.0);
  CHECK(r.gray.p_value == 1.0);
  CHECK(r.diff.difference == 0.0);
  CHECK(r.diff.p_value == 1.0);
}
