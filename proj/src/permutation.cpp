#include "rmtl/permutation.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include "rmtl/error.hpp"
#include "rmtl/rng.hpp"

namespace rmtl {

void validate(const PermutationPlan& plan) {
  if (plan.count < 1) throw InputError("permutation count must be at least 1");
}

void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)>& body) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t workers = std::min<std::size_t>(threads, count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto run = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = count;
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run);
  }
  if (failure) std::rethrow_exception(failure);
}

std::vector<std::uint8_t> permuted_labels(std::span<const std::uint8_t> base, std::uint64_t seed,
                                          std::size_t index) {
  std::vector<std::uint8_t> labels(base.begin(), base.end());
  Rng rng(derive_seed(seed, 0x7065726dULL, index));
  std::shuffle(labels.begin(), labels.end(), rng);
  return labels;
}

PermutationDistribution permutation_distribution(const Sample& sample,
                                                 const SampleStatistic& statistic,
                                                 const PermutationPlan& plan) {
  validate(plan);
  if (sample.empty()) throw InputError("empty input");
  const auto base = sample.group_labels();
  PermutationDistribution dist;
  dist.values.resize(plan.count);
  dist.valid.assign(plan.count, false);
  std::vector<char> ok(plan.count, 0);
  parallel_for(plan.count, plan.threads, [&](std::size_t b) {
    const auto labels = permuted_labels(base, plan.seed, b);
    try {
      dist.values[b] = statistic(sample.relabeled(labels));
      ok[b] = 1;
    } catch (const std::exception&) {
      dist.values[b].clear();
    }
  });
  for (std::size_t b = 0; b < plan.count; ++b) {
    dist.valid[b] = ok[b] != 0;
    if (!ok[b]) ++dist.invalid_count;
  }
  if (static_cast<double>(dist.invalid_count) > kMaxInvalidFraction * static_cast<double>(plan.count)) {
    throw DegenerateError("more than 10% of permutations could not be evaluated");
  }
  return dist;
}

}  // namespace rmtl
