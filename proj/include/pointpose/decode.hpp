#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "pointpose/grid.hpp"

namespace pointpose {

/// Pose heatmaps (K channels) plus the three single-channel detection
/// heatmaps, all at one resolution.
struct HeatmapBundle {
  Grid pose;
  Grid center;
  Grid top_left;
  Grid bottom_right;
  double stride = 4.0;  // input pixels per heatmap cell

  int height() const { return pose.height(); }
  int width() const { return pose.width(); }
  int joints() const { return pose.channels(); }

  /// Throws std::invalid_argument unless all grids share H x W, detection
  /// grids have one channel and stride >= 1.
  void validate() const;
};

struct DecodeConfig {
  double phi_det = 0.1;
  double phi_pose = 0.2;
  std::size_t top_n = 32;
  double central_fraction = 1.0 / 3.0;
  std::size_t max_boxes = 32;
  bool subpixel = true;
  /// 3x3 local-max suppression before thresholding and top-N.
  bool peak_suppression = true;

  void validate() const;
};

struct Keypoint {
  double x = 0;
  double y = 0;
  double score = 0;
  bool present = false;

  friend bool operator==(const Keypoint&, const Keypoint&) = default;
};

struct PersonPose {
  Box box;
  std::vector<Keypoint> keypoints;

  friend bool operator==(const PersonPose&, const PersonPose&) = default;
};

/// Candidate points of one detection heatmap: peaks >= phi_det, top-N.
std::vector<Point> detection_points(const Grid& heatmap, const DecodeConfig& cfg);

/// Pairs every top-left with every bottom-right point (tl.x < br.x, tl.y < br.y)
/// and keeps a pair iff a center point lies strictly inside the box's central
/// region. Score is the mean of the three point scores, using the best
/// qualifying center. Output is sorted by score descending, then (x1, y1, x2, y2),
/// deduplicated on exact coordinates and capped at cfg.max_boxes.
std::vector<Box> group_boxes(const std::vector<Point>& top_left,
                             const std::vector<Point>& bottom_right,
                             const std::vector<Point>& centers, const DecodeConfig& cfg);

/// detection_points on each detection heatmap followed by group_boxes.
/// Coordinates are heatmap cells.
std::vector<Box> decode_boxes(const HeatmapBundle& bundle, const DecodeConfig& cfg);

/// Per-channel peaks >= phi_pose, optionally shifted 0.25 cells per axis
/// toward the larger neighbour; a missing border neighbour never wins.
std::vector<Point> decode_keypoints(const Grid& pose, const DecodeConfig& cfg);

/// For each box and channel, the best-scoring point of that channel inside the
/// box (boundary inclusive). A point may be claimed by several boxes.
std::vector<PersonPose> group_keypoints_geometric(const std::vector<Point>& points,
                                                  const std::vector<Box>& boxes, int joints);

/// decode_boxes -> decode_keypoints -> group_keypoints_geometric.
std::vector<PersonPose> decode_poses(const HeatmapBundle& bundle, const DecodeConfig& cfg);

/// Resizes every grid to the resolution of the scale-1.0 entry and averages
/// per grid kind. Throws if the list is empty or has no scale-1.0 entry.
HeatmapBundle multi_scale_fuse(const std::vector<std::pair<HeatmapBundle, double>>& bundles);

}  // namespace pointpose
