#pragma once

#include <functional>
#include <vector>

#include "pointpose/grid.hpp"

namespace pointpose::diff {

/// p <- p - lr * g, elementwise. Throws on shape mismatch or lr <= 0.
void sgd_step(Grid64& params, const Grid64& grads, double lr);

/// Relative error |a - n| / max(|a|, |n|), with values below `floor` in both
/// treated as agreeing exactly.
double relative_error(double analytic, double numeric, double floor = 1e-10);

struct GradCheckResult {
  std::vector<double> relative_errors;  // one per checked element
  double max_error() const;
  double median_error() const;
};

/// Central differences of `f` around `x`, compared element by element with
/// `analytic` (which must have x's shape).
GradCheckResult check_gradient(const std::function<double(const Grid64&)>& f, const Grid64& x,
                               const Grid64& analytic, double step = 1e-4);

}  // namespace pointpose::diff
