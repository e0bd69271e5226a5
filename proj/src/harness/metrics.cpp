#include "pointpose/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace pointpose {

std::vector<int> greedy_match(const std::vector<Box>& pred, const std::vector<Box>& gt,
                              double iou_tau) {
  std::vector<std::size_t> order(pred.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return pred[a].score > pred[b].score; });
  std::vector<int> match(pred.size(), -1);
  std::vector<bool> taken(gt.size(), false);
  for (std::size_t i : order) {
    int best = -1;
    double best_iou = iou_tau;
    for (std::size_t g = 0; g < gt.size(); ++g) {
      if (taken[g]) continue;
      const double v = iou(pred[i], gt[g]);
      if (v >= best_iou && (best < 0 || v > best_iou)) {
        best = static_cast<int>(g);
        best_iou = v;
      }
    }
    if (best >= 0) {
      taken[best] = true;
      match[i] = best;
    }
  }
  return match;
}

DetectionPR det_pr(const std::vector<Box>& pred, const std::vector<Box>& gt, double iou_tau) {
  if (!(iou_tau > 0.0 && iou_tau < 1.0)) throw std::invalid_argument("det_pr: iou_tau must be in (0,1)");
  const auto match = greedy_match(pred, gt, iou_tau);
  DetectionPR r;
  r.true_positives = std::count_if(match.begin(), match.end(), [](int m) { return m >= 0; });
  r.predicted = pred.size();
  r.ground_truth = gt.size();
  r.precision = pred.empty() ? 1.0 : static_cast<double>(r.true_positives) / pred.size();
  r.recall = gt.empty() ? 1.0 : static_cast<double>(r.true_positives) / gt.size();
  return r;
}

PckCount pck_count(const std::vector<PersonPose>& pred, const Scene& scene, double tau,
                   double match_iou) {
  if (!(tau > 0.0)) throw std::invalid_argument("pck: tau must be > 0");
  std::vector<Box> boxes;
  boxes.reserve(pred.size());
  for (const PersonPose& p : pred) boxes.push_back(p.box);
  const auto match = greedy_match(boxes, scene.boxes(), match_iou);
  std::vector<int> owner(scene.persons.size(), -1);
  for (std::size_t i = 0; i < match.size(); ++i) {
    if (match[i] >= 0) owner[match[i]] = static_cast<int>(i);
  }

  PckCount count;
  for (std::size_t g = 0; g < scene.persons.size(); ++g) {
    const Person& person = scene.persons[g];
    const double limit = tau * std::hypot(person.box.width(), person.box.height());
    for (std::size_t k = 0; k < person.keypoints.size(); ++k) {
      const SceneKeypoint& truth = person.keypoints[k];
      if (!truth.visible) continue;
      ++count.total;
      if (owner[g] < 0) continue;
      const auto& kps = pred[owner[g]].keypoints;
      if (k >= kps.size() || !kps[k].present) continue;
      if (std::hypot(kps[k].x - truth.x, kps[k].y - truth.y) <= limit) ++count.correct;
    }
  }
  return count;
}

double pck(const std::vector<PersonPose>& pred, const Scene& scene, double tau, double match_iou) {
  return pck_count(pred, scene, tau, match_iou).ratio();
}

double EvalReport::mean_scene_pck() const {
  if (per_scene.empty()) return 1.0;
  double sum = 0;
  for (const SceneEval& s : per_scene) sum += s.pck;
  return sum / per_scene.size();
}

void Evaluator::add(const std::vector<PersonPose>& pred, const Scene& scene) {
  std::vector<Box> boxes;
  for (const PersonPose& p : pred) boxes.push_back(p.box);
  const DetectionPR d = det_pr(boxes, scene.boxes(), iou_tau_);
  const PckCount k = pck_count(pred, scene, pck_tau_, iou_tau_);
  keypoints_.correct += k.correct;
  keypoints_.total += k.total;
  tp_ += d.true_positives;
  predicted_ += d.predicted;
  ground_truth_ += d.ground_truth;
  scenes_.push_back({scene.seed, k.ratio(), d.precision, d.recall});
}

EvalReport Evaluator::report() const {
  EvalReport r;
  r.pck = keypoints_.ratio();
  r.det_precision = predicted_ == 0 ? 1.0 : static_cast<double>(tp_) / predicted_;
  r.det_recall = ground_truth_ == 0 ? 1.0 : static_cast<double>(tp_) / ground_truth_;
  r.per_scene = scenes_;
  return r;
}

std::vector<PersonPose> to_pixels(std::vector<PersonPose> persons, double stride) {
  for (PersonPose& p : persons) {
    p.box = p.box.scaled(stride);
    for (Keypoint& k : p.keypoints) {
      k.x *= stride;
      k.y *= stride;
    }
  }
  return persons;
}

}  // namespace pointpose
