#include <algorithm>
#include <stdexcept>
#include <vector>

#include "pointpose/pointops.hpp"

namespace pointpose {

Grid center_pool(const Grid& g) {
  const int h = g.height();
  const int w = g.width();
  const int channels = g.channels();
  Grid out(h, w, channels);
  const float* src = g.values().data();
  float* dst = out.values().data();
#pragma omp parallel for schedule(static) if (channels > 1)
  for (int c = 0; c < channels; ++c) {
    auto at = [&](int y, int x) { return src[(static_cast<std::size_t>(y) * w + x) * channels + c]; };
    std::vector<float> row_max(h);
    std::vector<float> col_max(w);
    for (int x = 0; x < w; ++x) col_max[x] = at(0, x);
    constexpr int lanes = 8;
    float acc[lanes];
    for (int y = 0; y < h; ++y) {
      for (float& a : acc) a = at(y, 0);
      int x = 0;
      for (; x + lanes <= w; x += lanes)
        for (int l = 0; l < lanes; ++l) {
          const float v = at(y, x + l);
          acc[l] = v > acc[l] ? v : acc[l];
          col_max[x + l] = v > col_max[x + l] ? v : col_max[x + l];
        }
      for (; x < w; ++x) {
        const float v = at(y, x);
        acc[0] = v > acc[0] ? v : acc[0];
        col_max[x] = v > col_max[x] ? v : col_max[x];
      }
      float m = acc[0];
      for (int l = 1; l < lanes; ++l) m = acc[l] > m ? acc[l] : m;
      if (m == 0.0f) {
        // The sign of a zero maximum depends on scan order; redo it in order.
        m = at(y, 0);
        for (x = 1; x < w; ++x) m = std::max(m, at(y, x));
      }
      row_max[y] = m;
    }
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        dst[(static_cast<std::size_t>(y) * w + x) * channels + c] = row_max[y] + col_max[x];
  }
  return out;
}

namespace {

// Top-left cascade on one channel. The bottom-right variant is the same
// computation on the 180-degree rotated plane, which maps "smallest index on
// ties" onto "largest index on ties".
//
// Rows are visited bottom-up. For row y the row suffix argmax k (ties to the
// smallest index) and the column suffix maxima below y are known, so
//   horizontal = v(y, k) + colmax(y, k)
//   vertical   = colmax(y, x) + rowmax(m, x),  m = column suffix argmax,
// where rowmax(m, x) is carried per column and refreshed whenever the column
// argmax moves up to the current row.
template <bool Mirrored>
void cascade_top_left_plane(const float* src, float* dst, int h, int w, int stride) {
  const std::size_t n = static_cast<std::size_t>(h) * w;
  auto offset = [&](int y, int x) {
    const std::size_t i = static_cast<std::size_t>(y) * w + x;
    return (Mirrored ? n - 1 - i : i) * stride;
  };
  std::vector<float> row(w);
  std::vector<float> col_max(w);
  std::vector<float> row_max_at_col_arg(w);
  std::vector<float> row_max(w);
  std::vector<int> row_arg(w);

  for (int y = h - 1; y >= 0; --y) {
    for (int x = 0; x < w; ++x) row[x] = src[offset(y, x)];
    int arg = w - 1;
    float best = row[arg];
    for (int x = w - 1; x >= 0; --x) {
      const bool take = row[x] >= best;
      arg = take ? x : arg;
      best = take ? row[x] : best;
      row_arg[x] = arg;
      row_max[x] = best;
    }
    for (int x = 0; x < w; ++x) {
      if (y == h - 1 || row[x] >= col_max[x]) {
        col_max[x] = row[x];
        row_max_at_col_arg[x] = row_max[x];
      }
    }
    for (int x = 0; x < w; ++x) {
      const int k = row_arg[x];
      dst[offset(y, x)] = (row[k] + col_max[k]) + (col_max[x] + row_max_at_col_arg[x]);
    }
  }
}

}  // namespace

Grid cascade_corner_pool(const Grid& g, PoolKind kind) {
  if (kind == PoolKind::Center) {
    throw std::invalid_argument("cascade_corner_pool: PoolKind::Center is not a corner pool");
  }
  const int h = g.height();
  const int w = g.width();
  const int channels = g.channels();
  const bool mirrored = kind == PoolKind::CascadeBottomRight;
  Grid out(h, w, channels);
  const float* src = g.values().data();
  float* dst = out.values().data();
#pragma omp parallel for schedule(static) if (channels > 1)
  for (int c = 0; c < channels; ++c) {
    if (mirrored) cascade_top_left_plane<true>(src + c, dst + c, h, w, channels);
    else cascade_top_left_plane<false>(src + c, dst + c, h, w, channels);
  }
  return out;
}

}  // namespace pointpose
