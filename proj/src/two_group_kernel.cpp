#include "rmtl/two_group_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rmtl/error.hpp"

namespace rmtl {

namespace {

// Layout of Workspace::counts, per block and group.
enum CountSlot { kD1 = 0, kD2 = 1, kCens = 2, kCountSlots = 3 };

// Layout of Workspace::per_block.
enum BlockSlot {
  kK = 0,        // h1 h2 / (h1 + h2)
  kHazard,       // d1 / (h1 + h2)
  kH1, kH2,      // subdistribution risk mass
  kY1, kY2,      // at risk
  kF1m1, kF1m2,  // F1(t-)
  kF2m1, kF2m2,  // F2(t-)
  kBlockSlots
};

struct GroupState {
  double n = 0.0;
  double at_risk = 0.0;
  double surv = 1.0;
  double f1 = 0.0;
  double f2 = 0.0;
  double cens = 1.0;
  double last_interest = -1.0;
  double max_time = 0.0;
  // Open piece of the F1 step function for the restricted integrals.
  double piece_start = 0.0;
  double piece_value = 0.0;
  double area = 0.0;
  double second = 0.0;
};

void close_piece(GroupState& g, double end, double tau) {
  const double b = std::min(end, tau);
  if (b > g.piece_start && g.piece_value != 0.0) {
    const double a = g.piece_start;
    g.area += g.piece_value * (b - a);
    g.second += g.piece_value * ((tau - a) * (tau - a) - (tau - b) * (tau - b));
  }
}

}  // namespace

TwoGroupKernel::TwoGroupKernel(const Sample& sample) {
  const auto records = sample.records();
  status_.reserve(records.size());
  block_.reserve(records.size());
  for (const auto& r : records) {
    if (times_.empty() || r.time != times_.back()) times_.push_back(r.time);
    block_.push_back(static_cast<std::uint32_t>(times_.size() - 1));
    status_.push_back(static_cast<std::uint8_t>(r.status));
  }
}

KernelResult TwoGroupKernel::evaluate(std::span<const std::uint8_t> labels,
                                      std::optional<double> fixed_tau) const {
  Workspace ws;
  return evaluate(labels, fixed_tau, ws);
}

KernelResult TwoGroupKernel::evaluate(std::span<const std::uint8_t> labels,
                                      std::optional<double> fixed_tau, Workspace& ws) const {
  if (labels.size() != status_.size()) throw InputError("label count does not match sample size");
  const std::size_t nb = times_.size();
  ws.counts.assign(nb * 2 * kCountSlots, 0.0);
  ws.per_block.assign(nb * kBlockSlots, 0.0);
  double* counts = ws.counts.data();
  double* blocks = ws.per_block.data();

  GroupState grp[2];
  for (std::size_t i = 0; i < status_.size(); ++i) {
    const int g = labels[i] - 1;
    const std::size_t k = block_[i];
    grp[g].n += 1.0;
    grp[g].max_time = times_[k];
    switch (status_[i]) {
      case 1:
        counts[(k * 2 + g) * kCountSlots + kD1] += 1.0;
        grp[g].last_interest = times_[k];
        break;
      case 2: counts[(k * 2 + g) * kCountSlots + kD2] += 1.0; break;
      default: counts[(k * 2 + g) * kCountSlots + kCens] += 1.0; break;
    }
  }

  KernelResult out;
  RmtlDiffResult& diff = out.diff;
  double tau = 0.0;
  bool tau_ok = grp[0].n > 0.0 && grp[1].n > 0.0;
  if (fixed_tau) {
    tau = *fixed_tau;
    tau_ok = tau_ok && tau > 0.0 && tau <= grp[0].max_time && tau <= grp[1].max_time;
  } else {
    tau_ok = tau_ok && grp[0].last_interest > 0.0 && grp[1].last_interest > 0.0;
    tau = std::min(grp[0].last_interest, grp[1].last_interest);
  }
  diff.tau = tau;

  for (auto& g : grp) g.at_risk = g.n;
  double score = 0.0;
  double total_interest = 0.0;
  for (std::size_t k = 0; k < nb; ++k) {
    const double* c1 = counts + (k * 2 + 0) * kCountSlots;
    const double* c2 = counts + (k * 2 + 1) * kCountSlots;
    double* row = blocks + k * kBlockSlots;
    const double h1 = grp[0].n * grp[0].cens * (1.0 - grp[0].f1);
    const double h2 = grp[1].n * grp[1].cens * (1.0 - grp[1].f1);
    const double d1 = c1[kD1] + c2[kD1];
    row[kH1] = h1;
    row[kH2] = h2;
    row[kY1] = grp[0].at_risk;
    row[kY2] = grp[1].at_risk;
    row[kF1m1] = grp[0].f1;
    row[kF1m2] = grp[1].f1;
    row[kF2m1] = grp[0].f2;
    row[kF2m2] = grp[1].f2;
    if (d1 > 0.0) {
      total_interest += d1;
      const double mass = h1 + h2;
      if (mass > 0.0) {
        row[kHazard] = d1 / mass;
        if (h1 > 0.0 && h2 > 0.0) {
          const double k_weight = h1 * h2 / mass;
          row[kK] = k_weight;
          score += k_weight * (c1[kD1] / h1 - c2[kD1] / h2);
        }
      }
    }

    for (int gi = 0; gi < 2; ++gi) {
      GroupState& g = grp[gi];
      const double* c = gi == 0 ? c1 : c2;
      if (g.at_risk <= 0.0) continue;
      const double d_all = c[kD1] + c[kD2];
      if (c[kD1] > 0.0) {
        if (tau_ok) close_piece(g, times_[k], tau);
        g.f1 += g.surv * c[kD1] / g.at_risk;
        g.piece_start = times_[k];
        g.piece_value = g.f1;
      }
      if (c[kD2] > 0.0) g.f2 += g.surv * c[kD2] / g.at_risk;
      if (d_all > 0.0) g.surv *= 1.0 - d_all / g.at_risk;
      const double cens_risk = g.at_risk - d_all;
      if (c[kCens] > 0.0 && cens_risk > 0.0) g.cens *= 1.0 - c[kCens] / cens_risk;
      g.at_risk -= d_all + c[kCens];
    }
  }

  // Gray variance: backward pass accumulating the future-hazard integral
  // Q_g(t) = sum over s > t of K(s) dGamma(s) / (1 - F1_g(s-)).
  GrayResult& gray = out.gray;
  if (total_interest > 0.0) {
    double q[2] = {0.0, 0.0};
    double variance = 0.0;
    for (std::size_t k = nb; k-- > 0;) {
      const double* row = blocks + k * kBlockSlots;
      for (int gi = 0; gi < 2; ++gi) {
        const double* c = counts + (k * 2 + gi) * kCountSlots;
        const double h = row[kH1 + gi];
        const double y = row[kY1 + gi];
        const double f1m = row[kF1m1 + gi];
        const double f2m = row[kF2m1 + gi];
        if (row[kHazard] > 0.0 && h > 0.0) {
          const double expected = h * row[kHazard];
          const double carry = y > 0.0 ? f2m * q[gi] / y : 0.0;
          const double a = row[kK] / h - carry;
          variance += expected * a * a;
        }
        if (c[kD2] > 0.0) {
          const double b = (1.0 - f1m) * q[gi] / y;
          variance += c[kD2] * b * b;
        }
      }
      if (row[kHazard] > 0.0 && row[kK] > 0.0) {
        for (int gi = 0; gi < 2; ++gi) {
          const double remaining = 1.0 - row[kF1m1 + gi];
          if (remaining > 0.0) q[gi] += row[kK] * row[kHazard] / remaining;
        }
      }
    }
    gray.valid = true;
    gray.score = score;
    gray.variance = variance;
    if (variance > 0.0) {
      gray.statistic = score * score / variance;
      gray.p_value = std::erfc(std::abs(score) / std::sqrt(2.0 * variance));
    } else if (score == 0.0) {
      gray.statistic = 0.0;
      gray.p_value = 1.0;
    } else {
      gray.valid = false;
    }
  }

  if (tau_ok) {
    for (int gi = 0; gi < 2; ++gi) {
      GroupState& g = grp[gi];
      close_piece(g, tau, tau);
      diff.rmtl[gi] = g.area;
      diff.per_subject_variance[gi] = std::max(g.second - g.area * g.area, 0.0);
    }
    diff.difference = diff.rmtl[0] - diff.rmtl[1];
    const double var =
        diff.per_subject_variance[0] / grp[0].n + diff.per_subject_variance[1] / grp[1].n;
    diff.standard_error = std::sqrt(var);
    if (var > 0.0) {
      diff.valid = true;
      diff.z = diff.difference / diff.standard_error;
      diff.p_value = std::erfc(std::abs(diff.z) / std::sqrt(2.0));
    } else if (diff.difference == 0.0) {
      diff.valid = true;
      diff.z = 0.0;
      diff.p_value = 1.0;
    }
  }
  return out;
}

}  // namespace rmtl
