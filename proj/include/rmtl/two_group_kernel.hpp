#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "rmtl/sample.hpp"

namespace rmtl {

struct GrayResult {
  bool valid = false;
  double score = 0.0;
  double variance = 0.0;
  double statistic = 0.0;
  double p_value = 1.0;
};

struct RmtlDiffResult {
  bool valid = false;
  double tau = 0.0;
  double rmtl[2] = {0.0, 0.0};
  double per_subject_variance[2] = {0.0, 0.0};
  double difference = 0.0;
  double standard_error = 0.0;
  double z = 0.0;
  double p_value = 1.0;
};

struct KernelResult {
  GrayResult gray;
  RmtlDiffResult diff;
};

/// Gray's test and the RMTL-difference test in one pass over a fixed time
/// ordering.
///
/// The sample is sorted once on construction; evaluating a labelling only
/// re-counts events per group, which is what permutation inference needs.
/// Gray's statistic uses the rho = 0 score with the subdistribution risk
/// mass n_g * G_g(t-) * (1 - F1_g(t-)), and its variance comes from the
/// martingale representation of the score through the cause-specific
/// counting processes of each group.
class TwoGroupKernel {
 public:
  struct Workspace {
    std::vector<double> counts;
    std::vector<double> per_block;
  };

  explicit TwoGroupKernel(const Sample& sample);

  // Labels in sorted-record order, each 1 or 2.  With no fixed tau the
  // horizon is recomputed from the labelling.
  KernelResult evaluate(std::span<const std::uint8_t> labels, std::optional<double> fixed_tau,
                        Workspace& ws) const;
  KernelResult evaluate(std::span<const std::uint8_t> labels,
                        std::optional<double> fixed_tau = std::nullopt) const;

  std::size_t size() const { return status_.size(); }
  std::size_t block_count() const { return times_.size(); }

 private:
  std::vector<double> times_;
  std::vector<std::uint32_t> block_;
  std::vector<std::uint8_t> status_;
};

}  // namespace rmtl
