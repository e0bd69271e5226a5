#include "pointpose/reference.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pointpose::reference {

Grid center_pool(const Grid& g) {
  Grid out(g.height(), g.width(), g.channels());
  for (int c = 0; c < g.channels(); ++c)
    for (int y = 0; y < g.height(); ++y)
      for (int x = 0; x < g.width(); ++x) {
        float row = g.at(y, 0, c);
        for (int k = 0; k < g.width(); ++k) row = std::max(row, g.at(y, k, c));
        float col = g.at(0, x, c);
        for (int m = 0; m < g.height(); ++m) col = std::max(col, g.at(m, x, c));
        out.at(y, x, c) = row + col;
      }
  return out;
}

namespace {

float cascade_top_left(const Grid& g, int y, int x, int c) {
  const int h = g.height();
  const int w = g.width();
  int k_star = x;
  for (int k = x + 1; k < w; ++k)
    if (g.at(y, k, c) > g.at(y, k_star, c)) k_star = k;
  float below = g.at(y, k_star, c);
  for (int m = y; m < h; ++m) below = std::max(below, g.at(m, k_star, c));

  int m_star = y;
  for (int m = y + 1; m < h; ++m)
    if (g.at(m, x, c) > g.at(m_star, x, c)) m_star = m;
  float right = g.at(m_star, x, c);
  for (int k = x; k < w; ++k) right = std::max(right, g.at(m_star, k, c));

  const float horizontal = g.at(y, k_star, c) + below;
  const float vertical = g.at(m_star, x, c) + right;
  return horizontal + vertical;
}

float cascade_bottom_right(const Grid& g, int y, int x, int c) {
  int k_star = x;
  for (int k = x - 1; k >= 0; --k)
    if (g.at(y, k, c) > g.at(y, k_star, c)) k_star = k;
  float above = g.at(y, k_star, c);
  for (int m = y; m >= 0; --m) above = std::max(above, g.at(m, k_star, c));

  int m_star = y;
  for (int m = y - 1; m >= 0; --m)
    if (g.at(m, x, c) > g.at(m_star, x, c)) m_star = m;
  float left = g.at(m_star, x, c);
  for (int k = x; k >= 0; --k) left = std::max(left, g.at(m_star, k, c));

  const float horizontal = g.at(y, k_star, c) + above;
  const float vertical = g.at(m_star, x, c) + left;
  return horizontal + vertical;
}

}  // namespace

Grid cascade_corner_pool(const Grid& g, PoolKind kind) {
  if (kind == PoolKind::Center) throw std::invalid_argument("reference::cascade_corner_pool: not a corner pool");
  Grid out(g.height(), g.width(), g.channels());
  for (int c = 0; c < g.channels(); ++c)
    for (int y = 0; y < g.height(); ++y)
      for (int x = 0; x < g.width(); ++x)
        out.at(y, x, c) = kind == PoolKind::CascadeTopLeft ? cascade_top_left(g, y, x, c)
                                                           : cascade_bottom_right(g, y, x, c);
  return out;
}

std::vector<Point> local_peaks(const Grid& g, double threshold) {
  std::vector<Point> out;
  for (int c = 0; c < g.channels(); ++c)
    for (int y = 0; y < g.height(); ++y)
      for (int x = 0; x < g.width(); ++x) {
        const float v = g.at(y, x, c);
        if (v < threshold) continue;
        bool is_max = true;
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            const int yy = std::clamp(y + dy, 0, g.height() - 1);
            const int xx = std::clamp(x + dx, 0, g.width() - 1);
            if (g.at(yy, xx, c) > v) is_max = false;
          }
        if (is_max) out.push_back({static_cast<double>(x), static_cast<double>(y), v, c});
      }
  return out;
}

Grid64 conv2d(const Grid64& x, const diff::ConvLayer& layer) {
  if (x.channels() != layer.in_channels) throw std::invalid_argument("reference::conv2d: channel mismatch");
  const int r = layer.kernel_size / 2;
  Grid64 out(x.height(), x.width(), layer.out_channels);
  for (int y = 0; y < x.height(); ++y)
    for (int xx = 0; xx < x.width(); ++xx)
      for (int co = 0; co < layer.out_channels; ++co) {
        double acc = layer.bias.at(0, 0, co);
        for (int ky = 0; ky < layer.kernel_size; ++ky)
          for (int kx = 0; kx < layer.kernel_size; ++kx) {
            const int sy = y + ky - r;
            const int sx = xx + kx - r;
            if (sy < 0 || sy >= x.height() || sx < 0 || sx >= x.width()) continue;
            for (int ci = 0; ci < layer.in_channels; ++ci) acc += layer.w(ky, kx, ci, co) * x.at(sy, sx, ci);
          }
        out.at(y, xx, co) = acc;
      }
  return out;
}

double bilinear_sample(const Grid64& x, double cy, double cx, int channel) {
  const double fy = std::clamp(cy - 0.5, 0.0, x.height() - 1.0);
  const double fx = std::clamp(cx - 0.5, 0.0, x.width() - 1.0);
  const int y0 = static_cast<int>(fy);
  const int x0 = static_cast<int>(fx);
  const int y1 = std::min(y0 + 1, x.height() - 1);
  const int x1 = std::min(x0 + 1, x.width() - 1);
  const double ly = fy - y0;
  const double lx = fx - x0;
  return (1 - ly) * (1 - lx) * x.at(y0, x0, channel) + (1 - ly) * lx * x.at(y0, x1, channel) +
         ly * (1 - lx) * x.at(y1, x0, channel) + ly * lx * x.at(y1, x1, channel);
}

Grid64 roialign(const Grid64& x, const Box& box, const diff::RoiAlignParams& p) {
  const Box b = diff::clamp_roi(box, x.height(), x.width());
  const int s = p.samples_per_bin;
  const double bin_h = (b.y2 - b.y1) / p.out_h;
  const double bin_w = (b.x2 - b.x1) / p.out_w;
  Grid64 out(p.out_h, p.out_w, x.channels());
  for (int c = 0; c < x.channels(); ++c)
    for (int oy = 0; oy < p.out_h; ++oy)
      for (int ox = 0; ox < p.out_w; ++ox) {
        double sum = 0;
        for (int sy = 0; sy < s; ++sy)
          for (int sx = 0; sx < s; ++sx) {
            const double cy = b.y1 + (oy + (sy + 0.5) / s) * bin_h;
            const double cx = b.x1 + (ox + (sx + 0.5) / s) * bin_w;
            sum += bilinear_sample(x, cy, cx, c);
          }
        out.at(oy, ox, c) = sum / (s * s);
      }
  return out;
}

}  // namespace pointpose::reference
