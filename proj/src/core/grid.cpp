#include "pointpose/grid.hpp"

#include <algorithm>
#include <cmath>

#include "pointpose/bilinear.hpp"

namespace pointpose {

std::string shape_string(int h, int w, int c) {
  return std::to_string(h) + "x" + std::to_string(w) + "x" + std::to_string(c);
}

double iou(const Box& a, const Box& b) {
  double ix = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  double iy = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  if (ix <= 0 || iy <= 0) return 0.0;
  double inter = ix * iy;
  double uni = a.area() + b.area() - inter;
  return uni > 0 ? inter / uni : 0.0;
}

void render_gaussian(Grid& grid, int channel, double cx, double cy, double sigma,
                     double amplitude) {
  grid.check_channel(channel);
  if (!(sigma > 0)) throw std::invalid_argument("render_gaussian: sigma must be > 0");
  if (!(cx >= -0.5 && cx < grid.width() - 0.5 && cy >= -0.5 && cy < grid.height() - 0.5)) {
    throw std::out_of_range("render_gaussian: center (" + std::to_string(cx) + ", " +
                            std::to_string(cy) + ") outside grid " + shape_string(grid));
  }
  const double inv = 1.0 / (2.0 * sigma * sigma);
  const int h = grid.height();
  const int w = grid.width();
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    const double dy2 = (y - cy) * (y - cy);
    for (int x = 0; x < w; ++x) {
      const double dx = x - cx;
      const float v = static_cast<float>(amplitude * std::exp(-(dx * dx + dy2) * inv));
      float& cell = grid.at(y, x, channel);
      cell = std::max(cell, v);
    }
  }
}

Grid bilinear_resize(const Grid& g, int out_h, int out_w) {
  if (out_h < 1 || out_w < 1) throw std::invalid_argument("bilinear_resize: output dims must be >= 1");
  Grid out(out_h, out_w, g.channels());
  const double sy = static_cast<double>(g.height()) / out_h;
  const double sx = static_cast<double>(g.width()) / out_w;
  const int channels = g.channels();
#pragma omp parallel for schedule(static)
  for (int y = 0; y < out_h; ++y) {
    const LinearTap ty = linear_tap((y + 0.5) * sy, g.height());
    for (int x = 0; x < out_w; ++x) {
      const LinearTap tx = linear_tap((x + 0.5) * sx, g.width());
      for (int c = 0; c < channels; ++c) {
        double top = tx.w_lo * g.at(ty.lo, tx.lo, c) + tx.w_hi * g.at(ty.lo, tx.hi, c);
        double bottom = tx.w_lo * g.at(ty.hi, tx.lo, c) + tx.w_hi * g.at(ty.hi, tx.hi, c);
        out.at(y, x, c) = static_cast<float>(ty.w_lo * top + ty.w_hi * bottom);
      }
    }
  }
  return out;
}

Grid collapse_channels(const Grid& g) {
  Grid out(g.height(), g.width(), 1);
  const int h = g.height();
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < g.width(); ++x) {
      float m = g.at(y, x, 0);
      for (int c = 1; c < g.channels(); ++c) m = std::max(m, g.at(y, x, c));
      out.at(y, x) = m;
    }
  }
  return out;
}

void clamp_values(Grid& g, float lo, float hi) {
  for (float& v : g.values()) v = std::clamp(v, lo, hi);
}

}  // namespace pointpose
