#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

#include "pointpose/diff/optim.hpp"
#include "pointpose/mimic.hpp"

namespace pointpose::mimic {

GroupingModule GroupingModule::identity(int joints, int r) {
  return {ConvLayer::identity(joints), Grid64(r, r, joints), ConvLayer::identity(joints)};
}

Grid GroupingModule::forward(const Grid& roi) const {
  if (roi.height() != position_bias.height() || roi.width() != position_bias.width() ||
      roi.channels() != position_bias.channels()) {
    throw std::invalid_argument("GroupingModule: ROI " + shape_string(roi) + " does not match module " +
                                shape_string(position_bias));
  }
  Grid64 hidden = diff::conv2d_forward(Grid64::cast_from(roi), first);
  auto h = hidden.values();
  auto b = position_bias.values();
  for (std::size_t i = 0; i < h.size(); ++i) h[i] = std::max(h[i] + b[i], 0.0);
  return Grid::cast_from(diff::conv2d_forward(hidden, second));
}

diff::Var GroupingModule::forward(diff::Tape& tape, diff::Var roi, bool trainable) const {
  auto bind = [&](const ConvLayer& l) {
    return trainable ? diff::bind_parameters(tape, l) : diff::bind_constants(tape, l);
  };
  const diff::ConvVars c1 = bind(first);
  const diff::Var bias = trainable ? tape.parameter(position_bias) : tape.constant(position_bias);
  const diff::ConvVars c2 = bind(second);
  const diff::Var hidden = diff::relu(tape, diff::add(tape, diff::conv2d(tape, roi, c1), bias));
  return diff::conv2d(tape, hidden, c2);
}

std::vector<diff::NamedGrid> GroupingModule::checkpoint() const {
  return {{"grouping.first.weight", Grid::cast_from(first.weight)},
          {"grouping.first.bias", Grid::cast_from(first.bias)},
          {"grouping.position_bias", Grid::cast_from(position_bias)},
          {"grouping.second.weight", Grid::cast_from(second.weight)},
          {"grouping.second.bias", Grid::cast_from(second.bias)}};
}

Grid grouping_target(const Grid& roi, const Scene& scene, int owner, const Box& box_cells,
                     double stride) {
  if (owner < 0 || owner >= static_cast<int>(scene.persons.size())) {
    throw std::out_of_range("grouping_target: owner index out of range");
  }
  const int r_h = roi.height();
  const int r_w = roi.width();
  Grid target(r_h, r_w, roi.channels());
  for (int k = 0; k < roi.channels(); ++k) {
    struct Candidate {
      double x, y;
      int person;
    };
    std::vector<Candidate> cands;
    for (std::size_t p = 0; p < scene.persons.size(); ++p) {
      const auto& kps = scene.persons[p].keypoints;
      if (k >= static_cast<int>(kps.size()) || !kps[k].visible) continue;
      cands.push_back({crop_coordinate(kps[k].x / stride, box_cells.x1, box_cells.x2, r_w),
                       crop_coordinate(kps[k].y / stride, box_cells.y1, box_cells.y2, r_h),
                       static_cast<int>(p)});
    }
    for (int y = 0; y < r_h; ++y)
      for (int x = 0; x < r_w; ++x) {
        int nearest = -1;
        double best = std::numeric_limits<double>::infinity();
        for (const Candidate& c : cands) {
          const double d = (c.x - x) * (c.x - x) + (c.y - y) * (c.y - y);
          if (d < best) {
            best = d;
            nearest = c.person;
          }
        }
        if (nearest == owner) target.at(y, x, k) = roi.at(y, x, k);
      }
  }
  return target;
}

GroupingSample make_grouping_sample(std::uint64_t seed, const GroupingDataOptions& o) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };
  auto snap = [](double v) { return std::round(v / 4.0) * 4.0; };

  const double size = o.scene_size;
  const double w = snap(uniform(48.0, 80.0));
  const double h = snap(w * uniform(1.2, 1.8));
  const double x1 = snap(0.5 * (size - w) + uniform(-8.0, 8.0));
  const double y1 = snap(0.5 * (size - h) + uniform(-8.0, 8.0));
  const Box owner_box{x1, y1, x1 + w, y1 + h, 1.0};

  const double angle = uniform(0.0, 2.0 * std::acos(-1.0));
  const double shift = uniform(o.min_shift, o.max_shift);
  const double dw = w * uniform(0.85, 1.15);
  const double dh = h * uniform(0.85, 1.15);
  const double dx1 = std::clamp(x1 + shift * std::cos(angle) * w, 0.0, size - dw - 4);
  const double dy1 = std::clamp(y1 + shift * std::sin(angle) * h, 0.0, size - dh - 4);
  const Box distractor_box{dx1, dy1, dx1 + dw, dy1 + dh, 1.0};

  Scene scene;
  scene.width = scene.height = o.scene_size;
  scene.joints = o.joints;
  scene.seed = seed;
  scene.persons.push_back(make_person(owner_box, o.joints, 0.03, 0.0, rng()));
  scene.persons.push_back(make_person(distractor_box, o.joints, 0.03, 0.0, rng()));

  const int cells = heatmap_cells(o.scene_size, o.stride);
  Grid pose(cells, cells, o.joints);
  for (const Person& p : scene.persons) {
    const double amplitude = uniform(o.min_amplitude, o.max_amplitude);
    for (int k = 0; k < o.joints; ++k) {
      render_gaussian(pose, k, p.keypoints[k].x / o.stride, p.keypoints[k].y / o.stride, o.sigma,
                      amplitude);
    }
  }

  const Box box_cells = owner_box.scaled(1.0 / o.stride);
  const int r = o.resolution;
  GroupingSample s;
  s.roi = extract_student_roi(pose, box_cells, r);
  s.target = grouping_target(s.roi, scene, 0, box_cells, o.stride);
  auto inside = [&](const SceneKeypoint& kp) -> std::optional<std::pair<double, double>> {
    const double x = crop_coordinate(kp.x / o.stride, box_cells.x1, box_cells.x2, r);
    const double y = crop_coordinate(kp.y / o.stride, box_cells.y1, box_cells.y2, r);
    if (!kp.visible || x < -0.5 || x >= r - 0.5 || y < -0.5 || y >= r - 0.5) return std::nullopt;
    return std::pair{x, y};
  };
  for (int k = 0; k < o.joints; ++k) {
    s.owner_keypoints.push_back(inside(scene.persons[0].keypoints[k]));
    s.contested.push_back(inside(scene.persons[1].keypoints[k]).has_value());
  }
  return s;
}

std::vector<GroupingSample> make_grouping_dataset(std::size_t count, std::uint64_t seed,
                                                  const GroupingDataOptions& options) {
  std::vector<GroupingSample> out(count);
  std::vector<std::uint64_t> seeds(count);
  std::mt19937_64 rng(seed);
  for (auto& s : seeds) s = rng();
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < count; ++i) out[i] = make_grouping_sample(seeds[i], options);
  return out;
}

namespace {

diff::Var grouping_loss_var(diff::Tape& tape, const GroupingModule& m, const GroupingSample& s,
                            bool trainable) {
  const diff::Var out = m.forward(tape, tape.constant(Grid64::cast_from(s.roi)), trainable);
  const diff::Var loss = diff::mse(tape, out, tape.constant(Grid64::cast_from(s.target)));
  return diff::scale(tape, loss, 0.5 * s.roi.height() * s.roi.width());
}

}  // namespace

double grouping_loss(const GroupingModule& module, const GroupingSample& sample) {
  diff::Tape tape;
  return tape.scalar(grouping_loss_var(tape, module, sample, false));
}

GroupingTrainResult train_grouping_module(GroupingModule module,
                                          const std::vector<GroupingSample>& dataset,
                                          const GroupingTrainConfig& cfg) {
  if (dataset.empty()) throw std::invalid_argument("train_grouping_module: empty dataset");
  GroupingTrainResult result{std::move(module), {}};
  GroupingModule& m = result.module;
  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), 0);
  std::size_t cursor = order.size();
  for (int step = 0; step < cfg.steps; ++step) {
    if (cursor == order.size()) {
      std::shuffle(order.begin(), order.end(), rng);
      cursor = 0;
    }
    diff::Tape tape;
    const diff::Var loss = grouping_loss_var(tape, m, dataset[order[cursor++]], true);
    result.losses.push_back(tape.scalar(loss));
    tape.backward(loss);
    // Parameters were bound in declaration order: first.{weight,bias}, position_bias, second.{weight,bias}.
    const auto params = tape.parameters();
    Grid64* targets[] = {&m.first.weight, &m.first.bias, &m.position_bias, &m.second.weight,
                         &m.second.bias};
    for (std::size_t i = 0; i < params.size(); ++i) diff::sgd_step(*targets[i], tape.grad(params[i]), cfg.lr);
  }
  return result;
}

OwnershipScore ownership_accuracy(const GroupingModule& module,
                                  const std::vector<GroupingSample>& samples, bool contested_only) {
  OwnershipScore score;
  for (const GroupingSample& s : samples) {
    const Grid out = module.forward(s.roi);
    for (int k = 0; k < out.channels(); ++k) {
      const auto& truth = s.owner_keypoints[k];
      if (!truth || (contested_only && !s.contested[k])) continue;
      int ay = 0, ax = 0;
      for (int y = 0; y < out.height(); ++y)
        for (int x = 0; x < out.width(); ++x)
          if (out.at(y, x, k) > out.at(ay, ax, k)) {
            ay = y;
            ax = x;
          }
      ++score.total;
      if (std::abs(ax - truth->first) <= 1.0 && std::abs(ay - truth->second) <= 1.0) ++score.correct;
    }
  }
  return score;
}

}  // namespace pointpose::mimic
