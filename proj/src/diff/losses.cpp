#include "pointpose/diff/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pointpose::diff {

namespace {

void check_same(const Grid64& a, const Grid64& b, const char* op) {
  if (!a.same_shape(b)) {
    throw std::invalid_argument(std::string(op) + ": shape mismatch " + shape_string(a) + " vs " +
                                shape_string(b));
  }
}

double positive_count(const Grid64& target) {
  std::size_t n = 0;
  for (double y : target.values()) n += (y == 1.0);
  return static_cast<double>(std::max<std::size_t>(1, n));
}

}  // namespace

double mse(const Grid64& a, const Grid64& b) {
  check_same(a, b, "mse");
  auto av = a.values();
  auto bv = b.values();
  double sum = 0;
  for (std::size_t i = 0; i < av.size(); ++i) {
    const double d = av[i] - bv[i];
    sum += d * d;
  }
  return sum / static_cast<double>(av.size());
}

Grid64 mse_grad(const Grid64& a, const Grid64& b) {
  check_same(a, b, "mse");
  Grid64 g(a.height(), a.width(), a.channels());
  auto av = a.values();
  auto bv = b.values();
  auto gv = g.values();
  const double scale = 2.0 / static_cast<double>(av.size());
  for (std::size_t i = 0; i < av.size(); ++i) gv[i] = scale * (av[i] - bv[i]);
  return g;
}

double focal_det_loss(const Grid64& pred, const Grid64& target) {
  check_same(pred, target, "focal_det_loss");
  auto pv = pred.values();
  auto yv = target.values();
  double sum = 0;
  for (std::size_t i = 0; i < pv.size(); ++i) {
    const double p = std::clamp(pv[i], kFocalEps, 1.0 - kFocalEps);
    const double y = yv[i];
    if (y == 1.0) {
      sum += (1 - p) * (1 - p) * std::log(p);
    } else {
      const double q = (1 - y) * (1 - y);
      sum += q * q * p * p * std::log1p(-p);
    }
  }
  return -sum / positive_count(target);
}

Grid64 focal_det_loss_grad(const Grid64& pred, const Grid64& target) {
  check_same(pred, target, "focal_det_loss");
  Grid64 g(pred.height(), pred.width(), pred.channels());
  auto pv = pred.values();
  auto yv = target.values();
  auto gv = g.values();
  const double scale = -1.0 / positive_count(target);
  for (std::size_t i = 0; i < pv.size(); ++i) {
    const double raw = pv[i];
    if (raw < kFocalEps || raw > 1.0 - kFocalEps) continue;
    const double p = raw;
    const double y = yv[i];
    double d;
    if (y == 1.0) {
      d = -2 * (1 - p) * std::log(p) + (1 - p) * (1 - p) / p;
    } else {
      const double q = (1 - y) * (1 - y);
      d = q * q * (2 * p * std::log1p(-p) - p * p / (1 - p));
    }
    gv[i] = scale * d;
  }
  return g;
}

}  // namespace pointpose::diff
