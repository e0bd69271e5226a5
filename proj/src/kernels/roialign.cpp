#include <algorithm>
#include <stdexcept>
#include <vector>

#include "pointpose/bilinear.hpp"
#include "pointpose/diff/layers.hpp"

namespace pointpose::diff {

Box clamp_roi(const Box& box, int height, int width) {
  Box b = box;
  b.x1 = std::clamp(b.x1, 0.0, static_cast<double>(width));
  b.x2 = std::clamp(b.x2, 0.0, static_cast<double>(width));
  b.y1 = std::clamp(b.y1, 0.0, static_cast<double>(height));
  b.y2 = std::clamp(b.y2, 0.0, static_cast<double>(height));
  if (!(b.x1 < b.x2) || !(b.y1 < b.y2)) {
    throw std::invalid_argument("roialign: degenerate box after clamping");
  }
  return b;
}

namespace {

void check_params(const RoiAlignParams& p) {
  if (p.out_h < 1 || p.out_w < 1 || p.samples_per_bin < 1) {
    throw std::invalid_argument("roialign: output dims and samples_per_bin must be >= 1");
  }
}

// Taps for every sample position along one axis, bin-major.
std::vector<LinearTap> axis_taps(double lo, double hi, int bins, int samples, int size) {
  std::vector<LinearTap> taps;
  taps.reserve(static_cast<std::size_t>(bins) * samples);
  const double bin = (hi - lo) / bins;
  for (int b = 0; b < bins; ++b)
    for (int s = 0; s < samples; ++s) taps.push_back(linear_tap(lo + bin * (b + (s + 0.5) / samples), size));
  return taps;
}

}  // namespace

template <typename T>
BasicGrid<T> roialign_forward(const BasicGrid<T>& x, const Box& box, const RoiAlignParams& p) {
  check_params(p);
  const Box b = clamp_roi(box, x.height(), x.width());
  const int s = p.samples_per_bin;
  const auto ty = axis_taps(b.y1, b.y2, p.out_h, s, x.height());
  const auto tx = axis_taps(b.x1, b.x2, p.out_w, s, x.width());
  const int channels = x.channels();
  const double norm = 1.0 / (s * s);
  BasicGrid<T> out(p.out_h, p.out_w, channels);
#pragma omp parallel for schedule(static)
  for (int oy = 0; oy < p.out_h; ++oy) {
    std::vector<double> acc(channels);
    for (int ox = 0; ox < p.out_w; ++ox) {
      std::fill(acc.begin(), acc.end(), 0.0);
      for (int sy = 0; sy < s; ++sy) {
        const LinearTap& a = ty[static_cast<std::size_t>(oy) * s + sy];
        for (int sx = 0; sx < s; ++sx) {
          const LinearTap& c = tx[static_cast<std::size_t>(ox) * s + sx];
          const double w00 = a.w_lo * c.w_lo, w01 = a.w_lo * c.w_hi;
          const double w10 = a.w_hi * c.w_lo, w11 = a.w_hi * c.w_hi;
          for (int ch = 0; ch < channels; ++ch) {
            acc[ch] += w00 * x.at(a.lo, c.lo, ch) + w01 * x.at(a.lo, c.hi, ch) +
                       w10 * x.at(a.hi, c.lo, ch) + w11 * x.at(a.hi, c.hi, ch);
          }
        }
      }
      for (int ch = 0; ch < channels; ++ch) out.at(oy, ox, ch) = static_cast<T>(acc[ch] * norm);
    }
  }
  return out;
}

template BasicGrid<float> roialign_forward(const BasicGrid<float>&, const Box&, const RoiAlignParams&);
template BasicGrid<double> roialign_forward(const BasicGrid<double>&, const Box&, const RoiAlignParams&);

Grid64 roialign_backward(int in_h, int in_w, const Box& box, const RoiAlignParams& p,
                         const Grid64& grad_out) {
  check_params(p);
  if (grad_out.height() != p.out_h || grad_out.width() != p.out_w) {
    throw std::invalid_argument("roialign_backward: grad_out shape mismatch");
  }
  const Box b = clamp_roi(box, in_h, in_w);
  const int s = p.samples_per_bin;
  const auto ty = axis_taps(b.y1, b.y2, p.out_h, s, in_h);
  const auto tx = axis_taps(b.x1, b.x2, p.out_w, s, in_w);
  const int channels = grad_out.channels();
  const double norm = 1.0 / (s * s);
  Grid64 gin(in_h, in_w, channels);
  for (int oy = 0; oy < p.out_h; ++oy)
    for (int ox = 0; ox < p.out_w; ++ox)
      for (int sy = 0; sy < s; ++sy) {
        const LinearTap& a = ty[static_cast<std::size_t>(oy) * s + sy];
        for (int sx = 0; sx < s; ++sx) {
          const LinearTap& c = tx[static_cast<std::size_t>(ox) * s + sx];
          for (int ch = 0; ch < channels; ++ch) {
            const double g = grad_out.at(oy, ox, ch) * norm;
            gin.at(a.lo, c.lo, ch) += g * a.w_lo * c.w_lo;
            gin.at(a.lo, c.hi, ch) += g * a.w_lo * c.w_hi;
            gin.at(a.hi, c.lo, ch) += g * a.w_hi * c.w_lo;
            gin.at(a.hi, c.hi, ch) += g * a.w_hi * c.w_hi;
          }
        }
      }
  return gin;
}

}  // namespace pointpose::diff
