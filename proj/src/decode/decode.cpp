#include "pointpose/decode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <tuple>

#include "pointpose/pointops.hpp"

namespace pointpose {

void HeatmapBundle::validate() const {
  const int h = pose.height();
  const int w = pose.width();
  for (const Grid* g : {&center, &top_left, &bottom_right}) {
    if (g->height() != h || g->width() != w) {
      throw std::invalid_argument("HeatmapBundle: detection grid " + shape_string(*g) +
                                  " does not match pose grid " + shape_string(pose));
    }
    if (g->channels() != 1) throw std::invalid_argument("HeatmapBundle: detection grids must have 1 channel");
  }
  if (!(stride >= 1.0)) throw std::invalid_argument("HeatmapBundle: stride must be >= 1");
}

void DecodeConfig::validate() const {
  auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!unit(phi_det) || !unit(phi_pose)) throw std::invalid_argument("DecodeConfig: thresholds must be in [0,1]");
  if (!(central_fraction > 0.0 && central_fraction <= 1.0)) {
    throw std::invalid_argument("DecodeConfig: central_fraction must be in (0,1]");
  }
}

std::vector<Point> detection_points(const Grid& heatmap, const DecodeConfig& cfg) {
  auto pts = cfg.peak_suppression ? local_peaks(heatmap, cfg.phi_det)
                                  : threshold_points(heatmap, cfg.phi_det);
  return top_n_points(std::move(pts), cfg.top_n);
}

namespace {

bool box_order(const Box& a, const Box& b) {
  if (a.score != b.score) return a.score > b.score;
  return std::tie(a.x1, a.y1, a.x2, a.y2) < std::tie(b.x1, b.y1, b.x2, b.y2);
}

}  // namespace

std::vector<Box> group_boxes(const std::vector<Point>& top_left,
                             const std::vector<Point>& bottom_right,
                             const std::vector<Point>& centers, const DecodeConfig& cfg) {
  cfg.validate();
  std::vector<Box> boxes;
  for (const Point& tl : top_left) {
    for (const Point& br : bottom_right) {
      if (!(tl.x < br.x && tl.y < br.y)) continue;
      const double cx = 0.5 * (tl.x + br.x);
      const double cy = 0.5 * (tl.y + br.y);
      const double half_w = 0.5 * cfg.central_fraction * (br.x - tl.x);
      const double half_h = 0.5 * cfg.central_fraction * (br.y - tl.y);
      const Point* best = nullptr;
      for (const Point& c : centers) {
        if (std::abs(c.x - cx) < half_w && std::abs(c.y - cy) < half_h &&
            (best == nullptr || point_rank_less(c, *best))) {
          best = &c;
        }
      }
      if (best == nullptr) continue;
      boxes.push_back({tl.x, tl.y, br.x, br.y, (tl.score + br.score + best->score) / 3.0});
    }
  }
  std::sort(boxes.begin(), boxes.end(), box_order);
  // After sorting, the first box of each coordinate tuple carries its best score.
  std::vector<Box> unique;
  for (const Box& b : boxes) {
    bool seen = false;
    for (const Box& u : unique) {
      if (u.x1 == b.x1 && u.y1 == b.y1 && u.x2 == b.x2 && u.y2 == b.y2) {
        seen = true;
        break;
      }
    }
    if (!seen) unique.push_back(b);
    if (unique.size() >= cfg.max_boxes) break;
  }
  return unique;
}

std::vector<Box> decode_boxes(const HeatmapBundle& bundle, const DecodeConfig& cfg) {
  bundle.validate();
  cfg.validate();
  return group_boxes(detection_points(bundle.top_left, cfg),
                     detection_points(bundle.bottom_right, cfg),
                     detection_points(bundle.center, cfg), cfg);
}

std::vector<Point> decode_keypoints(const Grid& pose, const DecodeConfig& cfg) {
  cfg.validate();
  auto pts = cfg.peak_suppression ? local_peaks(pose, cfg.phi_pose)
                                  : threshold_points(pose, cfg.phi_pose);
  if (!cfg.subpixel) return pts;
  const int h = pose.height();
  const int w = pose.width();
  for (Point& p : pts) {
    const int x = static_cast<int>(p.x);
    const int y = static_cast<int>(p.y);
    // Neighbours outside the grid never attract the shift.
    constexpr float none = -std::numeric_limits<float>::infinity();
    const float left = x > 0 ? pose.at(y, x - 1, p.channel) : none;
    const float right = x + 1 < w ? pose.at(y, x + 1, p.channel) : none;
    const float up = y > 0 ? pose.at(y - 1, x, p.channel) : none;
    const float down = y + 1 < h ? pose.at(y + 1, x, p.channel) : none;
    if (right > left) p.x += 0.25;
    else if (left > right) p.x -= 0.25;
    if (down > up) p.y += 0.25;
    else if (up > down) p.y -= 0.25;
  }
  return pts;
}

std::vector<PersonPose> group_keypoints_geometric(const std::vector<Point>& points,
                                                  const std::vector<Box>& boxes, int joints) {
  if (joints < 1) throw std::invalid_argument("group_keypoints_geometric: joints must be >= 1");
  std::vector<PersonPose> persons;
  persons.reserve(boxes.size());
  for (const Box& box : boxes) {
    PersonPose person{box, std::vector<Keypoint>(joints)};
    std::vector<const Point*> best(joints, nullptr);
    for (const Point& p : points) {
      if (p.channel < 0 || p.channel >= joints || !box.contains(p.x, p.y)) continue;
      const Point*& slot = best[p.channel];
      if (slot == nullptr || point_rank_less(p, *slot)) slot = &p;
    }
    for (int k = 0; k < joints; ++k) {
      if (best[k] != nullptr) person.keypoints[k] = {best[k]->x, best[k]->y, best[k]->score, true};
    }
    persons.push_back(std::move(person));
  }
  return persons;
}

std::vector<PersonPose> decode_poses(const HeatmapBundle& bundle, const DecodeConfig& cfg) {
  auto boxes = decode_boxes(bundle, cfg);
  auto points = decode_keypoints(bundle.pose, cfg);
  return group_keypoints_geometric(points, boxes, bundle.joints());
}

namespace {

void accumulate_resized(std::vector<double>& sum, const Grid& g, int h, int w) {
  Grid r = (g.height() == h && g.width() == w) ? g : bilinear_resize(g, h, w);
  auto v = r.values();
  for (std::size_t i = 0; i < v.size(); ++i) sum[i] += v[i];
}

Grid mean_grid(const std::vector<double>& sum, int h, int w, int c, std::size_t n) {
  Grid out(h, w, c);
  auto v = out.values();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<float>(sum[i] / n);
  return out;
}

}  // namespace

HeatmapBundle multi_scale_fuse(const std::vector<std::pair<HeatmapBundle, double>>& bundles) {
  if (bundles.empty()) throw std::invalid_argument("multi_scale_fuse: no bundles");
  auto ref = std::find_if(bundles.begin(), bundles.end(),
                          [](const auto& e) { return std::abs(e.second - 1.0) < 1e-9; });
  if (ref == bundles.end()) throw std::invalid_argument("multi_scale_fuse: no scale-1.0 bundle");
  const HeatmapBundle& base = ref->first;
  base.validate();
  const int h = base.height();
  const int w = base.width();
  const int k = base.joints();

  std::vector<double> pose(static_cast<std::size_t>(h) * w * k, 0.0);
  std::vector<double> center(static_cast<std::size_t>(h) * w, 0.0);
  std::vector<double> tl(center.size(), 0.0);
  std::vector<double> br(center.size(), 0.0);
  for (const auto& [b, scale] : bundles) {
    b.validate();
    if (b.joints() != k) throw std::invalid_argument("multi_scale_fuse: joint count mismatch");
    accumulate_resized(pose, b.pose, h, w);
    accumulate_resized(center, b.center, h, w);
    accumulate_resized(tl, b.top_left, h, w);
    accumulate_resized(br, b.bottom_right, h, w);
  }
  const std::size_t n = bundles.size();
  return HeatmapBundle{mean_grid(pose, h, w, k, n), mean_grid(center, h, w, 1, n),
                       mean_grid(tl, h, w, 1, n), mean_grid(br, h, w, 1, n), base.stride};
}

}  // namespace pointpose
