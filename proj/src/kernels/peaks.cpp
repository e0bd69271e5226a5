#include <algorithm>
#include <tuple>

#include "pointpose/pointops.hpp"

namespace pointpose {

namespace {

bool is_local_max(const Grid& g, int y, int x, int c) {
  const float v = g.at(y, x, c);
  const int y0 = std::max(0, y - 1), y1 = std::min(g.height() - 1, y + 1);
  const int x0 = std::max(0, x - 1), x1 = std::min(g.width() - 1, x + 1);
  for (int yy = y0; yy <= y1; ++yy)
    for (int xx = x0; xx <= x1; ++xx)
      if (g.at(yy, xx, c) > v) return false;
  return true;
}

template <typename Predicate>
std::vector<Point> collect(const Grid& g, double threshold, Predicate keep) {
  const int channels = g.channels();
  std::vector<std::vector<Point>> per_channel(channels);
#pragma omp parallel for schedule(dynamic)
  for (int c = 0; c < channels; ++c) {
    for (int y = 0; y < g.height(); ++y)
      for (int x = 0; x < g.width(); ++x) {
        const float v = g.at(y, x, c);
        if (v >= threshold && keep(y, x, c)) per_channel[c].push_back({double(x), double(y), v, c});
      }
  }
  std::vector<Point> out;
  for (auto& pts : per_channel) out.insert(out.end(), pts.begin(), pts.end());
  return out;
}

}  // namespace

std::vector<Point> local_peaks(const Grid& g, double threshold) {
  return collect(g, threshold, [&](int y, int x, int c) { return is_local_max(g, y, x, c); });
}

std::vector<Point> threshold_points(const Grid& g, double threshold) {
  return collect(g, threshold, [](int, int, int) { return true; });
}

bool point_rank_less(const Point& a, const Point& b) {
  if (a.score != b.score) return a.score > b.score;
  return std::tie(a.y, a.x, a.channel) < std::tie(b.y, b.x, b.channel);
}

std::vector<Point> top_n_points(std::vector<Point> points, std::size_t n) {
  const std::size_t keep = std::min(n, points.size());
  std::partial_sort(points.begin(), points.begin() + static_cast<std::ptrdiff_t>(keep),
                    points.end(), point_rank_less);
  points.resize(keep);
  return points;
}

}  // namespace pointpose
