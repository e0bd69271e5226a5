#include <charconv>
#include <stdexcept>

#include "pointpose/diff/losses.hpp"
#include "pointpose/mimic.hpp"
#include "pointpose/results.hpp"

namespace pointpose::mimic {

namespace {

void check_roi_shapes(const Grid& roi, const TeacherBundle& t, const ConvLayer& a1,
                      const ConvLayer& a2) {
  if (!roi.same_shape(t.gt) || !roi.same_shape(t.pred)) {
    throw std::invalid_argument("mimic_losses: student ROI " + shape_string(roi) +
                                " does not match teacher " + shape_string(t.gt));
  }
  for (const ConvLayer* a : {&a1, &a2}) {
    if (a->in_channels != roi.channels() || a->out_channels != roi.channels()) {
      throw std::invalid_argument("mimic_losses: adapter must map K -> K channels");
    }
  }
}

}  // namespace

MimicLosses mimic_losses(const Grid& student_roi, const TeacherBundle& teacher,
                         const ConvLayer& a1, const ConvLayer& a2) {
  check_roi_shapes(student_roi, teacher, a1, a2);
  const auto s = Grid64::cast_from(student_roi);
  return {diff::mse(s, diff::conv2d_forward(Grid64::cast_from(teacher.gt), a1)),
          diff::mse(s, diff::conv2d_forward(Grid64::cast_from(teacher.pred), a2))};
}

MimicLossVars mimic_losses(diff::Tape& tape, std::span<const diff::Var> student_rois,
                           std::span<const TeacherBundle> teachers, const diff::ConvVars& a1,
                           const diff::ConvVars& a2) {
  if (student_rois.empty() || student_rois.size() != teachers.size()) {
    throw std::invalid_argument("mimic_losses: need one teacher per student ROI, at least one");
  }
  std::vector<diff::Var> m1, m2;
  for (std::size_t i = 0; i < teachers.size(); ++i) {
    const Grid64& roi = tape.value(student_rois[i]);
    const TeacherBundle& t = teachers[i];
    if (roi.height() != t.gt.height() || roi.width() != t.gt.width() ||
        roi.channels() != t.gt.channels() || !t.gt.same_shape(t.pred)) {
      throw std::invalid_argument("mimic_losses: student ROI " + shape_string(roi) +
                                  " does not match teacher " + shape_string(t.gt));
    }
    const diff::Var gt = tape.constant(Grid64::cast_from(t.gt));
    const diff::Var pred = tape.constant(Grid64::cast_from(t.pred));
    m1.push_back(diff::mse(tape, student_rois[i], diff::conv2d(tape, gt, a1)));
    m2.push_back(diff::mse(tape, student_rois[i], diff::conv2d(tape, pred, a2)));
  }
  const std::vector<double> mean(teachers.size(), 1.0 / teachers.size());
  return {diff::linear_combination(tape, m1, mean), diff::linear_combination(tape, m2, mean)};
}

double total_loss(double l_pose, double l_det, double l_m, const MimicConfig& cfg, int stage) {
  if (stage == 1) return l_pose + cfg.alpha * l_det;
  if (stage == 2) return l_pose + cfg.alpha * l_det + cfg.beta * l_m;
  throw std::invalid_argument("total_loss: stage must be 1 or 2");
}

void MimicConfig::validate() const {
  if (alpha < 0 || beta < 0) throw std::invalid_argument("MimicConfig: alpha and beta must be >= 0");
  if (teacher_res < 4) throw std::invalid_argument("MimicConfig: teacher_res must be >= 4");
  if (steps < 1 || stage2_start < 0 || stage2_start >= steps) {
    throw std::invalid_argument("MimicConfig: need 0 <= stage2_start < steps");
  }
  if (!(lr > 0) || !(det_lr > 0)) throw std::invalid_argument("MimicConfig: lr and det_lr must be > 0");
  if (max_persons < 1 || joints < 1) throw std::invalid_argument("MimicConfig: max_persons and joints must be >= 1");
  if (!(student_gain > 0)) throw std::invalid_argument("MimicConfig: student_gain must be > 0");
  if (checkpoint_every < 0) throw std::invalid_argument("MimicConfig: checkpoint_every must be >= 0");
}

namespace {

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end) {
    throw ConfigError("config: bad value '" + text + "' for key '" + key + "'");
  }
  return value;
}

}  // namespace

MimicConfig MimicConfig::from_map(const std::map<std::string, std::string>& kv) {
  MimicConfig cfg;
  for (const auto& [key, value] : kv) {
    if (key == "alpha") cfg.alpha = parse_number<double>(key, value);
    else if (key == "beta") cfg.beta = parse_number<double>(key, value);
    else if (key == "teacher_res") cfg.teacher_res = parse_number<int>(key, value);
    else if (key == "stage2_start") cfg.stage2_start = parse_number<int>(key, value);
    else if (key == "lr") cfg.lr = parse_number<double>(key, value);
    else if (key == "det_lr") cfg.det_lr = parse_number<double>(key, value);
    else if (key == "steps") cfg.steps = parse_number<int>(key, value);
    else if (key == "seed") cfg.seed = parse_number<std::uint64_t>(key, value);
    else if (key == "teacher_noise") cfg.teacher_noise = parse_number<double>(key, value);
    else if (key == "student_gain") cfg.student_gain = parse_number<double>(key, value);
    else if (key == "student_noise") cfg.student_noise = parse_number<double>(key, value);
    else if (key == "max_persons") cfg.max_persons = parse_number<int>(key, value);
    else if (key == "overlap") cfg.overlap = parse_number<double>(key, value);
    else if (key == "scene_size") cfg.scene_size = parse_number<int>(key, value);
    else if (key == "joints") cfg.joints = parse_number<int>(key, value);
    else if (key == "stride") cfg.stride = parse_number<double>(key, value);
    else if (key == "sigma") cfg.sigma = parse_number<double>(key, value);
    else if (key == "checkpoint_every") cfg.checkpoint_every = parse_number<int>(key, value);
    else throw ConfigError("config: unknown key '" + key + "'");
  }
  cfg.validate();
  return cfg;
}

}  // namespace pointpose::mimic
