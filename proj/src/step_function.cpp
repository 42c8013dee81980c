#include "rmtl/step_function.hpp"

#include <algorithm>

namespace rmtl {

double StepFunction::operator()(double t) const {
  auto it = std::upper_bound(knots.begin(), knots.end(), t);
  if (it == knots.begin()) return value_at_zero;
  return values[static_cast<std::size_t>(it - knots.begin()) - 1];
}

double StepFunction::left_limit(double t) const {
  auto it = std::lower_bound(knots.begin(), knots.end(), t);
  if (it == knots.begin()) return value_at_zero;
  return values[static_cast<std::size_t>(it - knots.begin()) - 1];
}

double StepFunction::integral(double lower, double upper) const {
  if (upper <= lower) return 0.0;
  double total = 0.0;
  double a = 0.0;
  double v = value_at_zero;
  for (std::size_t i = 0; i <= knots.size(); ++i) {
    const double b = i < knots.size() ? knots[i] : upper;
    const double lo = std::max(a, lower);
    const double hi = std::min(b, upper);
    if (hi > lo) total += v * (hi - lo);
    if (b >= upper) break;
    a = b;
    v = values[i];
  }
  return total;
}

double StepFunction::integral(double upper) const { return integral(0.0, upper); }

double StepFunction::moment_integral(double upper) const {
  double total = 0.0;
  double a = 0.0;
  double v = value_at_zero;
  for (std::size_t i = 0; i <= knots.size(); ++i) {
    const double b = i < knots.size() ? std::min(knots[i], upper) : upper;
    if (b > a) total += v * (b * b - a * a) / 2.0;
    if (b >= upper) break;
    a = b;
    v = values[i];
  }
  return total;
}

}  // namespace rmtl
