#include "pointpose/diff/optim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pointpose::diff {

void sgd_step(Grid64& params, const Grid64& grads, double lr) {
  if (!(lr > 0)) throw std::invalid_argument("sgd_step: lr must be > 0");
  if (!params.same_shape(grads)) {
    throw std::invalid_argument("sgd_step: shape mismatch " + shape_string(params) + " vs " +
                                shape_string(grads));
  }
  auto p = params.values();
  auto g = grads.values();
  for (std::size_t i = 0; i < p.size(); ++i) p[i] -= lr * g[i];
}

double relative_error(double analytic, double numeric, double floor) {
  const double scale = std::max(std::abs(analytic), std::abs(numeric));
  if (scale < floor) return 0.0;
  return std::abs(analytic - numeric) / scale;
}

double GradCheckResult::max_error() const {
  return relative_errors.empty() ? 0.0
                                 : *std::max_element(relative_errors.begin(), relative_errors.end());
}

double GradCheckResult::median_error() const {
  if (relative_errors.empty()) return 0.0;
  std::vector<double> v = relative_errors;
  auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  return *mid;
}

GradCheckResult check_gradient(const std::function<double(const Grid64&)>& f, const Grid64& x,
                               const Grid64& analytic, double step) {
  if (!x.same_shape(analytic)) throw std::invalid_argument("check_gradient: shape mismatch");
  GradCheckResult result;
  Grid64 probe = x;
  auto pv = probe.values();
  auto av = analytic.values();
  for (std::size_t i = 0; i < pv.size(); ++i) {
    const double orig = pv[i];
    pv[i] = orig + step;
    const double up = f(probe);
    pv[i] = orig - step;
    const double down = f(probe);
    pv[i] = orig;
    result.relative_errors.push_back(relative_error(av[i], (up - down) / (2 * step)));
  }
  return result;
}

}  // namespace pointpose::diff
