#pragma once

#include <limits>
#include <vector>

namespace rmtl {

/// Right-continuous piecewise-constant function on [0, inf).
///
/// values[i] holds on [knots[i], knots[i+1]); value_at_zero holds on
/// [0, knots[0]). `horizon` is the largest observed time of the data the
/// function was estimated from, which bounds where integrals make sense.
struct StepFunction {
  std::vector<double> knots;
  std::vector<double> values;
  double value_at_zero = 0.0;
  double horizon = std::numeric_limits<double>::infinity();

  double operator()(double t) const;
  double left_limit(double t) const;

  // Exact integral over [0, upper].
  double integral(double upper) const;
  // Exact integral of t * f(t) over [0, upper].
  double moment_integral(double upper) const;
  // Exact integral over [lower, upper].
  double integral(double lower, double upper) const;

  friend bool operator==(const StepFunction&, const StepFunction&) = default;
};

}  // namespace rmtl
