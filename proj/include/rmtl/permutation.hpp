#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "rmtl/sample.hpp"

namespace rmtl {

enum class TauMode { Recompute, Fixed };

struct PermutationPlan {
  std::size_t count = 200;
  std::uint64_t seed = 0;
  // 0 picks std::thread::hardware_concurrency().
  unsigned threads = 0;
  TauMode tau_mode = TauMode::Recompute;
};

void validate(const PermutationPlan& plan);

// Runs body(i) for i in [0, count) on up to `threads` workers.  The first
// exception thrown by any call is rethrown after all workers finish.
void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)>& body);

// Uniform random relabelling with group sizes preserved.  Permutation
// `index` depends only on (seed, index), never on evaluation order.
std::vector<std::uint8_t> permuted_labels(std::span<const std::uint8_t> base, std::uint64_t seed,
                                          std::size_t index);

struct PermutationDistribution {
  // One row per permutation, in permutation order; rows of invalid
  // iterations are empty.
  std::vector<std::vector<double>> values;
  std::vector<bool> valid;
  std::size_t invalid_count = 0;

  std::size_t valid_count() const { return values.size() - invalid_count; }
};

using SampleStatistic = std::function<std::vector<double>(const Sample&)>;

// Evaluates `statistic` on plan.count relabelled copies of `sample`.  An
// iteration whose statistic throws is recorded as invalid; more than 10%
// invalid iterations is an error.
PermutationDistribution permutation_distribution(const Sample& sample,
                                                 const SampleStatistic& statistic,
                                                 const PermutationPlan& plan);

// Fraction of iterations allowed to fail before the whole run is rejected.
inline constexpr double kMaxInvalidFraction = 0.10;

}  // namespace rmtl
