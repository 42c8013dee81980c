#include "rmtl/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rmtl/error.hpp"

namespace rmtl {

namespace {

// Counts at one distinct time.
struct TimeBlock {
  double time = 0.0;
  double at_risk = 0.0;
  double interest = 0.0;
  double competing = 0.0;
  double censored = 0.0;
};

std::vector<TimeBlock> time_blocks(const Sample& sample) {
  std::vector<TimeBlock> blocks;
  const auto records = sample.records();
  double removed = 0.0;
  const double n = static_cast<double>(records.size());
  for (std::size_t i = 0; i < records.size();) {
    TimeBlock b;
    b.time = records[i].time;
    b.at_risk = n - removed;
    while (i < records.size() && records[i].time == b.time) {
      switch (records[i].status) {
        case Status::Interest: b.interest += 1.0; break;
        case Status::Competing: b.competing += 1.0; break;
        case Status::Censored: b.censored += 1.0; break;
      }
      ++i;
    }
    removed += b.interest + b.competing + b.censored;
    blocks.push_back(b);
  }
  return blocks;
}

double counted(const TimeBlock& b, EventSet events) {
  return (events.interest ? b.interest : 0.0) + (events.competing ? b.competing : 0.0);
}

void require_non_empty(const Sample& sample) {
  if (sample.empty()) throw InputError("empty input");
}

// Step estimates hold their last value beyond the final observation, so any
// finite positive tau is accepted here; callers comparing groups bound tau
// by the data.
void check_tau(double tau) {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw InputError("invalid tau");
}

StepFunction add_steps(const StepFunction& a, const StepFunction& b) {
  StepFunction out;
  out.value_at_zero = a.value_at_zero + b.value_at_zero;
  out.horizon = std::min(a.horizon, b.horizon);
  std::merge(a.knots.begin(), a.knots.end(), b.knots.begin(), b.knots.end(),
             std::back_inserter(out.knots));
  out.knots.erase(std::unique(out.knots.begin(), out.knots.end()), out.knots.end());
  out.values.reserve(out.knots.size());
  for (double t : out.knots) out.values.push_back(a(t) + b(t));
  return out;
}

}  // namespace

double RmtlEstimate::standard_error() const {
  return std::sqrt(per_subject_variance / static_cast<double>(n));
}

double RmstEstimate::standard_error() const { return std::sqrt(variance_of_point); }

double RcEstimate::standard_error() const {
  return std::sqrt(per_subject_variance / static_cast<double>(n));
}

StepFunction kaplan_meier(const Sample& sample, EventSet events) {
  require_non_empty(sample);
  StepFunction s;
  s.value_at_zero = 1.0;
  s.horizon = sample.max_time();
  double surv = 1.0;
  for (const auto& b : time_blocks(sample)) {
    const double d = counted(b, events);
    if (d == 0.0) continue;
    surv *= 1.0 - d / b.at_risk;
    s.knots.push_back(b.time);
    s.values.push_back(surv);
  }
  return s;
}

std::vector<RiskTerm> risk_terms(const Sample& sample, EventSet events) {
  require_non_empty(sample);
  std::vector<RiskTerm> out;
  for (const auto& b : time_blocks(sample)) {
    const double d = counted(b, events);
    if (d > 0.0) out.push_back({b.time, d, b.at_risk});
  }
  return out;
}

StepFunction censoring_km(const Sample& sample) {
  require_non_empty(sample);
  StepFunction g;
  g.value_at_zero = 1.0;
  g.horizon = sample.max_time();
  double surv = 1.0;
  for (const auto& b : time_blocks(sample)) {
    if (b.censored == 0.0) continue;
    const double at_risk = b.at_risk - b.interest - b.competing;
    surv *= 1.0 - b.censored / at_risk;
    g.knots.push_back(b.time);
    g.values.push_back(surv);
  }
  return g;
}

CifEstimate aalen_johansen(const Sample& sample, int event_type) {
  require_non_empty(sample);
  if (event_type != 1 && event_type != 2) throw InputError("event type must be 1 or 2");
  CifEstimate est;
  est.event_type = event_type;
  est.n = sample.size();
  est.cif.value_at_zero = 0.0;
  est.cif.horizon = sample.max_time();
  est.overall_survival.value_at_zero = 1.0;
  est.overall_survival.horizon = sample.max_time();

  double surv = 1.0;
  double cif = 0.0;
  for (const auto& b : time_blocks(sample)) {
    const double d_all = b.interest + b.competing;
    if (d_all == 0.0) continue;
    const double d_j = event_type == 1 ? b.interest : b.competing;
    if (d_j > 0.0) {
      cif += surv * d_j / b.at_risk;
      est.cif.knots.push_back(b.time);
      est.cif.values.push_back(cif);
    }
    surv *= 1.0 - d_all / b.at_risk;
    est.overall_survival.knots.push_back(b.time);
    est.overall_survival.values.push_back(surv);
  }
  return est;
}

double restricted_loss_variance(const StepFunction& cif, double tau, double area) {
  // 2*tau*A - 2*B equals the integral of 2*(tau - t)*I(t), which integrates
  // piecewise to v*((tau-a)^2 - (tau-b)^2).
  double second = 0.0;
  double a = 0.0;
  double v = cif.value_at_zero;
  for (std::size_t i = 0; i <= cif.knots.size(); ++i) {
    const double b = i < cif.knots.size() ? std::min(cif.knots[i], tau) : tau;
    if (b > a && v != 0.0) {
      second += v * ((tau - a) * (tau - a) - (tau - b) * (tau - b));
    }
    if (b >= tau) break;
    a = b;
    v = cif.values[i];
  }
  return second - area * area;
}

RmtlEstimate rmtl(const CifEstimate& cif, double tau) {
  check_tau(tau);
  RmtlEstimate est;
  est.tau = tau;
  est.n = cif.n;
  est.point = cif.cif.integral(tau);
  const double v = restricted_loss_variance(cif.cif, tau, est.point);
  est.variance_clamped = v < 0.0;
  est.per_subject_variance = std::max(v, 0.0);
  return est;
}

RmstEstimate rmst_from_survival(const StepFunction& survival, double tau,
                                std::span<const RiskTerm> greenwood_terms, std::size_t n) {
  check_tau(tau);
  RmstEstimate est;
  est.tau = tau;
  est.point = survival.integral(tau);
  double var = 0.0;
  for (const auto& term : greenwood_terms) {
    if (term.time > tau) break;
    const double tail = survival.integral(term.time, tau);
    if (term.at_risk == term.events) {
      if (tail != 0.0) est.unstable_variance = true;
      continue;
    }
    var += tail * tail * term.events / (term.at_risk * (term.at_risk - term.events));
  }
  est.variance_of_point = var;
  est.n = n;
  return est;
}

double rc_per_subject_variance(const CifEstimate& interest, const CifEstimate& competing,
                               double tau) {
  const StepFunction composite = add_steps(interest.cif, competing.cif);
  return restricted_loss_variance(composite, tau, composite.integral(tau));
}

RcEstimate rc(const Sample& sample, double tau) {
  require_non_empty(sample);
  check_tau(tau);
  const CifEstimate cif1 = aalen_johansen(sample, 1);
  const CifEstimate cif2 = aalen_johansen(sample, 2);
  RcEstimate est;
  est.tau = tau;
  est.n = sample.size();
  est.point = tau - rmtl(cif1, tau).point - rmtl(cif2, tau).point;
  const double v = rc_per_subject_variance(cif1, cif2, tau);
  est.variance_clamped = v < 0.0;
  est.per_subject_variance = std::max(v, 0.0);
  return est;
}

double select_tau(const Sample& sample) {
  double tau = std::numeric_limits<double>::infinity();
  for (int g : {1, 2}) {
    double last = -1.0;
    for (const auto& r : sample.records()) {
      if (r.group == g && r.status == Status::Interest) last = r.time;
    }
    if (last < 0.0) throw InputError("tau undefined; supply tau explicitly");
    tau = std::min(tau, last);
  }
  return tau;
}

}  // namespace rmtl
