#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "pointpose/decode.hpp"
#include "pointpose/scene.hpp"

namespace pointpose {

struct DetectionPR {
  double precision = 1.0;
  double recall = 1.0;
  std::size_t true_positives = 0;
  std::size_t predicted = 0;
  std::size_t ground_truth = 0;
};

/// Greedy matching: predictions in descending score order each take the
/// unmatched gt box of highest IoU (ties: lower index) if IoU >= iou_tau.
/// Returns gt index per prediction, or -1.
std::vector<int> greedy_match(const std::vector<Box>& pred, const std::vector<Box>& gt,
                              double iou_tau);

/// Empty predictions report precision 1.0; empty ground truth reports recall 1.0.
DetectionPR det_pr(const std::vector<Box>& pred, const std::vector<Box>& gt, double iou_tau);

struct PckCount {
  std::size_t correct = 0;
  std::size_t total = 0;
  /// 1.0 when there is nothing to find.
  double ratio() const { return total == 0 ? 1.0 : static_cast<double>(correct) / total; }
};

/// Persons are matched to gt boxes with greedy_match at match_iou; a visible gt
/// keypoint counts as correct if its matched person has the keypoint present
/// within tau * gt-box diagonal. Inputs are in pixels.
PckCount pck_count(const std::vector<PersonPose>& pred, const Scene& scene, double tau,
                   double match_iou = 0.5);
double pck(const std::vector<PersonPose>& pred, const Scene& scene, double tau,
           double match_iou = 0.5);

struct SceneEval {
  std::uint64_t seed = 0;
  double pck = 0;
  double det_precision = 0;
  double det_recall = 0;
};

/// Pooled ratios (sums of counts over all scenes) plus the per-scene values.
struct EvalReport {
  double pck = 1.0;
  double det_precision = 1.0;
  double det_recall = 1.0;
  std::vector<SceneEval> per_scene;

  double mean_scene_pck() const;
};

class Evaluator {
 public:
  Evaluator(double pck_tau, double iou_tau) : pck_tau_(pck_tau), iou_tau_(iou_tau) {}
  void add(const std::vector<PersonPose>& pred, const Scene& scene);
  EvalReport report() const;

 private:
  double pck_tau_;
  double iou_tau_;
  PckCount keypoints_;
  std::size_t tp_ = 0, predicted_ = 0, ground_truth_ = 0;
  std::vector<SceneEval> scenes_;
};

/// Converts decoded cell coordinates to input pixels.
std::vector<PersonPose> to_pixels(std::vector<PersonPose> persons, double stride);

}  // namespace pointpose
