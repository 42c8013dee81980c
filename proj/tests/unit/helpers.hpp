#pragma once

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <random>
#include <vector>

#include "rmtl/sample.hpp"

namespace testing {

struct Row {
  double time;
  int status;
  int group = 1;
};

inline rmtl::Sample make_sample(std::initializer_list<Row> rows) {
  std::vector<rmtl::SurvRecord> records;
  for (const auto& r : rows) records.push_back({r.time, rmtl::status_from_code(r.status), r.group});
  return rmtl::Sample(std::move(records));
}

inline rmtl::Sample make_sample(const std::vector<Row>& rows) {
  std::vector<rmtl::SurvRecord> records;
  for (const auto& r : rows) records.push_back({r.time, rmtl::status_from_code(r.status), r.group});
  return rmtl::Sample(std::move(records));
}

// Two-group sample with exponential latent times, uniform censoring and
// times rounded to `grid` so that ties occur.
inline rmtl::Sample random_sample(std::mt19937_64& rng, std::size_t n1, std::size_t n2,
                                  double censor_bound = 4.0, double grid = 0.0) {
  std::exponential_distribution<double> t1(0.6), t2(0.4);
  std::uniform_real_distribution<double> c(0.0, censor_bound);
  std::vector<rmtl::SurvRecord> records;
  for (int g = 1; g <= 2; ++g) {
    const std::size_t n = g == 1 ? n1 : n2;
    for (std::size_t i = 0; i < n; ++i) {
      const double a = t1(rng) * (g == 1 ? 1.0 : 1.3), b = t2(rng), cc = c(rng);
      double t = std::min({a, b, cc});
      const auto s = cc <= std::min(a, b) ? rmtl::Status::Censored
                     : a <= b             ? rmtl::Status::Interest
                                          : rmtl::Status::Competing;
      if (grid > 0.0) t = grid * std::ceil(t / grid);
      records.push_back({t, s, g});
    }
  }
  return rmtl::Sample(std::move(records));
}

}  // namespace testing
