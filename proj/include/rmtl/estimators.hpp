#pragma once

#include <span>
#include <vector>

#include "rmtl/sample.hpp"
#include "rmtl/step_function.hpp"

namespace rmtl {

// Which statuses count as events for a product-limit estimate; the rest are
// treated as censored.
struct EventSet {
  bool interest = true;
  bool competing = true;

  bool counts(Status s) const {
    return (s == Status::Interest && interest) || (s == Status::Competing && competing);
  }
};

inline constexpr EventSet kAllEvents{true, true};
inline constexpr EventSet kInterestOnly{true, false};

struct CifEstimate {
  int event_type = 1;
  StepFunction cif;
  StepFunction overall_survival;
  std::size_t n = 0;
};

struct RmtlEstimate {
  double tau = 0.0;
  double point = 0.0;
  double per_subject_variance = 0.0;
  std::size_t n = 0;
  bool variance_clamped = false;

  double standard_error() const;
};

struct RmstEstimate {
  double tau = 0.0;
  double point = 0.0;
  double variance_of_point = 0.0;
  std::size_t n = 0;
  bool unstable_variance = false;

  double standard_error() const;
};

struct RcEstimate {
  double tau = 0.0;
  double point = 0.0;
  double per_subject_variance = 0.0;
  std::size_t n = 0;
  bool variance_clamped = false;

  double standard_error() const;
};

// One product-limit step: d events among n at risk at `time`.
struct RiskTerm {
  double time = 0.0;
  double events = 0.0;
  double at_risk = 0.0;
};

StepFunction kaplan_meier(const Sample& sample, EventSet events = kAllEvents);

// Event times with their (d_i, n_i), as used by the Greenwood variance.
std::vector<RiskTerm> risk_terms(const Sample& sample, EventSet events = kAllEvents);

// Product-limit estimate of the censoring distribution. Observed events at a
// tied time leave the risk set before the censorings at that time.
StepFunction censoring_km(const Sample& sample);

CifEstimate aalen_johansen(const Sample& sample, int event_type);

// Area under a cumulative incidence curve up to tau with the per-subject
// variance 2*tau*A - 2*B - A^2 (A = int I, B = int t I), evaluated in closed
// form over the step pieces.
RmtlEstimate rmtl(const CifEstimate& cif, double tau);

// Per-subject variance for a CIF-type step function and its area.
double restricted_loss_variance(const StepFunction& cif, double tau, double area);

RmstEstimate rmst_from_survival(const StepFunction& survival, double tau,
                                std::span<const RiskTerm> greenwood_terms, std::size_t n = 0);

// Restricted mean event-free time with competing risks, tau minus both RMTLs.
RcEstimate rc(const Sample& sample, double tau);

// Per-subject variance of the composite restricted time.  Isolated so the
// construction can be swapped without touching callers.
double rc_per_subject_variance(const CifEstimate& interest, const CifEstimate& competing,
                               double tau);

// Smallest across groups of each group's last event-of-interest time.
double select_tau(const Sample& sample);

}  // namespace rmtl
