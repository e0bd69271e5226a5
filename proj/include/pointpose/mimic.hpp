#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pointpose/diff/checkpoint.hpp"
#include "pointpose/diff/layers.hpp"
#include "pointpose/diff/tape.hpp"
#include "pointpose/grid.hpp"
#include "pointpose/scene.hpp"

namespace pointpose::mimic {

using diff::ConvLayer;

/// Teacher heatmaps for one person crop, R x R x K.
struct TeacherBundle {
  Grid gt;
  Grid pred;
  Box person_box;  // student heatmap cells
  int owner = -1;  // scene person index
};

/// Position of a student-cell coordinate v inside an R-cell crop of [lo, hi],
/// in the same frame roialign uses for its output bins.
inline double crop_coordinate(double v, double lo, double hi, int r) {
  return (v - lo + 0.5) * r / (hi - lo) - 0.5;
}

/// Scene person whose gt box (scaled to cells) has the largest IoU with `box`;
/// ties go to the lower index. -1 if no person overlaps.
int owner_of(const Scene& scene, const Box& box_cells, double stride);

/// roialign of all K channels onto R x R, two samples per bin axis.
Grid extract_student_roi(const Grid& student_pose, const Box& box_cells, int r);

struct TeacherOptions {
  int resolution = 16;
  double noise = 0.0;
  std::uint64_t seed = 0;
  double stride = 4.0;
  double sigma = 2.0;  // student cells; scaled into the crop
};

/// gt: Gaussians at the crop coordinates of the owner's visible keypoints;
/// pred: gt plus seeded uniform noise, clamped to [0, 1].
/// Throws std::invalid_argument if no scene person overlaps the box.
TeacherBundle make_synthetic_teacher(const Scene& scene, const Box& box_cells,
                                     const TeacherOptions& options);

struct MimicLosses {
  double m1 = 0;
  double m2 = 0;
  double sum() const { return m1 + m2; }
};

/// L_m1 = mse(student_roi, a1(gt)), L_m2 = mse(student_roi, a2(pred)).
MimicLosses mimic_losses(const Grid& student_roi, const TeacherBundle& teacher,
                         const ConvLayer& a1, const ConvLayer& a2);

struct MimicLossVars {
  diff::Var m1;
  diff::Var m2;
};

/// Differentiable form, averaged over persons. Teacher maps enter the tape as
/// constants. Requires at least one person.
MimicLossVars mimic_losses(diff::Tape& tape, std::span<const diff::Var> student_rois,
                           std::span<const TeacherBundle> teachers, const diff::ConvVars& a1,
                           const diff::ConvVars& a2);

struct MimicConfig {
  double alpha = 1.0;
  double beta = 1.0;
  int teacher_res = 16;
  int stage2_start = 200;
  double lr = 0.5;
  /// Learning rate of the detection head, whose focal gradients are far larger.
  double det_lr = 1e-2;
  int steps = 400;
  std::uint64_t seed = 1;

  double teacher_noise = 0.1;
  /// Student heatmaps are the clean rendering scaled by this gain plus noise.
  double student_gain = 0.5;
  double student_noise = 0.02;
  int max_persons = 3;
  double overlap = 0.1;
  int scene_size = 256;
  int joints = 17;
  double stride = 4.0;
  double sigma = 2.0;
  /// Write a checkpoint every this many steps (0: only at the end).
  int checkpoint_every = 0;

  /// Throws std::invalid_argument on alpha/beta < 0, teacher_res < 4,
  /// stage2_start outside [0, steps), lr or det_lr <= 0.
  void validate() const;
  /// Unknown keys and malformed values raise ConfigError.
  static MimicConfig from_map(const std::map<std::string, std::string>& kv);
};

/// stage 1: pose + alpha * det; stage 2 adds beta * m.
double total_loss(double l_pose, double l_det, double l_m, const MimicConfig& cfg, int stage);

struct GroupingModule {
  ConvLayer first;
  /// Per-position bias added after the first convolution, R x R x K.
  Grid64 position_bias;
  ConvLayer second;

  /// Identity kernels, zero biases: forward(x) == max(x, 0).
  static GroupingModule identity(int joints, int r);
  Grid forward(const Grid& roi) const;
  diff::Var forward(diff::Tape& tape, diff::Var roi, bool trainable) const;

  std::vector<diff::NamedGrid> checkpoint() const;
};

struct GroupingSample {
  Grid roi;
  Grid target;
  /// Owner keypoint per channel in crop coordinates, if visible and inside the crop.
  std::vector<std::optional<std::pair<double, double>>> owner_keypoints;
  /// Channel has another person's visible keypoint inside the crop.
  std::vector<bool> contested;
};

/// Zeroes every cell of channel k whose nearest visible channel-k keypoint
/// (over all scene persons, in crop coordinates) does not belong to `owner`.
Grid grouping_target(const Grid& roi, const Scene& scene, int owner, const Box& box_cells,
                     double stride);

struct GroupingDataOptions {
  int resolution = 16;
  int joints = 17;
  double stride = 4.0;
  double sigma = 2.0;
  int scene_size = 256;
  /// Per-person peak amplitude range.
  double min_amplitude = 0.6;
  double max_amplitude = 1.0;
  /// Distractor offset from the owner box, as a fraction of its size.
  double min_shift = 0.2;
  double max_shift = 0.4;
};

/// Owner plus one overlapping distractor, rendered with per-person amplitudes
/// and cropped to the owner's gt box.
GroupingSample make_grouping_sample(std::uint64_t seed, const GroupingDataOptions& options);
std::vector<GroupingSample> make_grouping_dataset(std::size_t count, std::uint64_t seed,
                                                  const GroupingDataOptions& options);

struct GroupingTrainConfig {
  double lr = 0.05;
  int steps = 2000;
  std::uint64_t seed = 0;
};

/// Half the per-channel spatial sum of squared error, averaged over channels.
double grouping_loss(const GroupingModule& module, const GroupingSample& sample);

struct GroupingTrainResult {
  GroupingModule module;
  std::vector<double> losses;  // one per step, before that step's update
};

/// SGD, one sample per step drawn by a seeded shuffle of the dataset.
GroupingTrainResult train_grouping_module(GroupingModule module,
                                          const std::vector<GroupingSample>& dataset,
                                          const GroupingTrainConfig& cfg);

struct OwnershipScore {
  std::size_t correct = 0;
  std::size_t total = 0;
  double ratio() const { return total == 0 ? 1.0 : static_cast<double>(correct) / total; }
};

/// Channelwise argmax of the module output against the owner keypoint (within
/// one cell per axis), over channels whose owner keypoint is present. With
/// contested_only, only channels where another person competes are scored.
OwnershipScore ownership_accuracy(const GroupingModule& module,
                                  const std::vector<GroupingSample>& samples, bool contested_only);

/// Student-side trainables of the schedule.
struct StudentState {
  ConvLayer adapter1;
  ConvLayer adapter2;
  ConvLayer det_head;  // 1x1, three detection channels
  Grid64 residual;     // R x R x K, added to every student ROI

  static StudentState initial(int joints, int r);
  std::vector<diff::NamedGrid> checkpoint() const;
};

struct StepLosses {
  int step = 0;
  int stage = 1;
  double pose = 0;
  double det = 0;
  double m1 = 0;
  double m2 = 0;
  double total = 0;

  friend bool operator==(const StepLosses&, const StepLosses&) = default;
};

struct TrainingReport {
  std::vector<StepLosses> rows;
  /// Header `step,stage,L_pose,L_det,L_m1,L_m2,total`, values with 17 significant digits.
  std::string to_csv() const;
};

using SceneStream = std::function<Scene(int step)>;

/// 1..max_persons persons per step at the configured overlap, seeded by (seed, step).
SceneStream default_scene_stream(const MimicConfig& cfg);

struct ScheduleResult {
  TrainingReport report;
  StudentState state;
};

using CheckpointSink = std::function<void(int step, const StudentState&)>;

/// Stage 1 (step < stage2_start) minimizes pose + alpha * det; stage 2 adds
/// beta * (L_m1 + L_m2). L_m is measured in both stages so the report shows
/// its value before mimicking starts. Deterministic for a given config.
ScheduleResult run_mimic_schedule(const MimicConfig& cfg, const SceneStream& scenes,
                                  const CheckpointSink& sink = {});

}  // namespace pointpose::mimic
