#include <cstdio>
#include <stdexcept>

#include "pointpose/decode.hpp"
#include "pointpose/diff/optim.hpp"
#include "pointpose/mimic.hpp"

namespace pointpose::mimic {

StudentState StudentState::initial(int joints, int r) {
  return {ConvLayer::identity(joints), ConvLayer::identity(joints), ConvLayer::identity(3, 1),
          Grid64(r, r, joints)};
}

std::vector<diff::NamedGrid> StudentState::checkpoint() const {
  return {{"adapter1.weight", Grid::cast_from(adapter1.weight)},
          {"adapter1.bias", Grid::cast_from(adapter1.bias)},
          {"adapter2.weight", Grid::cast_from(adapter2.weight)},
          {"adapter2.bias", Grid::cast_from(adapter2.bias)},
          {"det_head.weight", Grid::cast_from(det_head.weight)},
          {"det_head.bias", Grid::cast_from(det_head.bias)},
          {"residual", Grid::cast_from(residual)}};
}

std::string TrainingReport::to_csv() const {
  std::string out = "step,stage,L_pose,L_det,L_m1,L_m2,total\n";
  char line[256];
  for (const StepLosses& r : rows) {
    std::snprintf(line, sizeof line, "%d,%d,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.step, r.stage,
                  r.pose, r.det, r.m1, r.m2, r.total);
    out += line;
  }
  return out;
}

namespace {

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a * 0x9E3779B97F4A7C15ull + b + 0x632BE59BD9B4E019ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

Grid64 stack_detection(const HeatmapBundle& b) {
  Grid64 out(b.height(), b.width(), 3);
  const Grid* grids[] = {&b.center, &b.top_left, &b.bottom_right};
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < b.height(); ++y)
      for (int x = 0; x < b.width(); ++x) out.at(y, x, c) = grids[c]->at(y, x, 0);
  return out;
}

void scale_grid(Grid& g, double gain) {
  for (float& v : g.values()) v = static_cast<float>(v * gain);
}

}  // namespace

SceneStream default_scene_stream(const MimicConfig& cfg) {
  return [cfg](int step) {
    const std::uint64_t seed = mix(cfg.seed, static_cast<std::uint64_t>(step));
    SceneParams p;
    p.n_persons = 1 + static_cast<int>(seed % static_cast<std::uint64_t>(cfg.max_persons));
    p.overlap_level = cfg.overlap;
    p.size = cfg.scene_size;
    p.joints = cfg.joints;
    p.seed = seed;
    return gen_scene(p);
  };
}

ScheduleResult run_mimic_schedule(const MimicConfig& cfg, const SceneStream& scenes,
                                  const CheckpointSink& sink) {
  cfg.validate();
  const int r = cfg.teacher_res;
  ScheduleResult result{{}, StudentState::initial(cfg.joints, r)};
  StudentState& s = result.state;

  for (int step = 0; step < cfg.steps; ++step) {
    const int stage = step < cfg.stage2_start ? 1 : 2;
    const Scene scene = scenes(step);
    if (scene.joints != cfg.joints) throw std::invalid_argument("run_mimic_schedule: scene joint count mismatch");

    const HeatmapBundle clean = render_scene(scene, {cfg.stride, cfg.sigma});
    HeatmapBundle student =
        render_scene(scene, {cfg.stride, cfg.sigma, cfg.student_noise, mix(cfg.seed, 2ull * step + 1)});
    for (Grid* g : {&student.pose, &student.center, &student.top_left, &student.bottom_right}) {
      scale_grid(*g, cfg.student_gain);
    }

    std::vector<TeacherBundle> teachers;
    std::vector<Box> boxes;
    for (const Box& box : decode_boxes(student, DecodeConfig{})) {
      if (owner_of(scene, box, cfg.stride) < 0) continue;
      TeacherOptions t{r, cfg.teacher_noise, mix(mix(cfg.seed, step), teachers.size()), cfg.stride,
                       cfg.sigma};
      teachers.push_back(make_synthetic_teacher(scene, box, t));
      boxes.push_back(box);
    }

    diff::Tape tape;
    const diff::ConvVars head = diff::bind_parameters(tape, s.det_head);
    const diff::Var residual = tape.parameter(s.residual);
    const diff::ConvVars a1 = diff::bind_parameters(tape, s.adapter1);
    const diff::ConvVars a2 = diff::bind_parameters(tape, s.adapter2);

    const diff::Var det_out = diff::conv2d(tape, tape.constant(stack_detection(student)), head);
    const diff::Var l_det = diff::focal_det_loss(tape, det_out, tape.constant(stack_detection(clean)));
    const diff::Var student_pose = tape.constant(Grid64::cast_from(student.pose));
    const diff::Var l_pose = diff::mse(tape, student_pose, tape.constant(Grid64::cast_from(clean.pose)));

    MimicLossVars m{tape.constant(Grid64(1, 1, 1)), tape.constant(Grid64(1, 1, 1))};
    if (!teachers.empty()) {
      std::vector<diff::Var> rois;
      for (const Box& box : boxes) {
        rois.push_back(diff::add(tape, diff::roialign(tape, student_pose, box, {r, r, 2}), residual));
      }
      m = mimic_losses(tape, rois, teachers, a1, a2);
    }

    std::vector<diff::Var> terms{l_pose, l_det};
    std::vector<double> coeffs{1.0, cfg.alpha};
    if (stage == 2) {
      terms.insert(terms.end(), {m.m1, m.m2});
      coeffs.insert(coeffs.end(), {cfg.beta, cfg.beta});
    }
    const diff::Var total = diff::linear_combination(tape, terms, coeffs);

    result.report.rows.push_back({step, stage, tape.scalar(l_pose), tape.scalar(l_det),
                                  tape.scalar(m.m1), tape.scalar(m.m2), tape.scalar(total)});

    tape.backward(total);
    Grid64* targets[] = {&s.det_head.weight, &s.det_head.bias, &s.residual,
                         &s.adapter1.weight, &s.adapter1.bias, &s.adapter2.weight,
                         &s.adapter2.bias};
    const auto params = tape.parameters();
    for (std::size_t i = 0; i < params.size(); ++i) {
      diff::sgd_step(*targets[i], tape.grad(params[i]), i < 2 ? cfg.det_lr : cfg.lr);
    }

    if (sink && cfg.checkpoint_every > 0 && (step + 1) % cfg.checkpoint_every == 0 && step + 1 < cfg.steps) {
      sink(step + 1, s);
    }
  }
  if (sink) sink(cfg.steps, s);
  return result;
}

}  // namespace pointpose::mimic
