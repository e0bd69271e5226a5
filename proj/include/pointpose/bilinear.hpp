#pragma once

#include <algorithm>
#include <cmath>

namespace pointpose {

/// Two-tap linear interpolation stencil along one axis.
struct LinearTap {
  int lo = 0;
  int hi = 0;
  double w_lo = 1.0;
  double w_hi = 0.0;
};

/// Stencil for a continuous coordinate in the half-pixel frame (cell i spans
/// [i, i + 1) with center i + 0.5), clamped to the edge cells.
inline LinearTap linear_tap(double continuous, int size) {
  double idx = std::clamp(continuous - 0.5, 0.0, static_cast<double>(size - 1));
  LinearTap tap;
  tap.lo = static_cast<int>(std::floor(idx));
  if (tap.lo >= size - 1) {
    tap.lo = tap.hi = size - 1;
    return tap;
  }
  tap.hi = tap.lo + 1;
  tap.w_hi = idx - tap.lo;
  tap.w_lo = 1.0 - tap.w_hi;
  return tap;
}

}  // namespace pointpose
