#include "pointpose/scene.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

#include <json.hpp>

namespace pointpose {

std::vector<Box> Scene::boxes() const {
  std::vector<Box> out;
  out.reserve(persons.size());
  for (const Person& p : persons) out.push_back(p.box);
  return out;
}

namespace {

// COCO joint order.
constexpr std::array<std::pair<double, double>, 17> kStickFigure = {{
    {0.50, 0.08},                // nose
    {0.54, 0.05}, {0.46, 0.05},  // eyes
    {0.58, 0.07}, {0.42, 0.07},  // ears
    {0.66, 0.22}, {0.34, 0.22},  // shoulders
    {0.74, 0.38}, {0.26, 0.38},  // elbows
    {0.78, 0.52}, {0.22, 0.52},  // wrists
    {0.60, 0.55}, {0.40, 0.55},  // hips
    {0.62, 0.75}, {0.38, 0.75},  // knees
    {0.63, 0.94}, {0.37, 0.94},  // ankles
}};

constexpr int kMaxRejections = 10000;

double quantize(double v, double q) { return q > 0 ? std::round(v / q) * q : v; }

}  // namespace

std::pair<double, double> joint_template(int k) {
  if (k < static_cast<int>(kStickFigure.size())) return kStickFigure[k];
  auto frac = [](double v) { return v - std::floor(v); };
  return {0.2 + 0.6 * frac(k * 0.6180339887), 0.1 + 0.8 * frac(k * 0.3819660113)};
}

Person make_person(const Box& box, int joints, double jitter, double invisible_probability,
                   std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> jit(-jitter, jitter);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Person person{box, {}};
  person.keypoints.reserve(joints);
  for (int k = 0; k < joints; ++k) {
    auto [u, v] = joint_template(k);
    u = std::clamp(u + jit(rng), 0.02, 0.98);
    v = std::clamp(v + jit(rng), 0.02, 0.98);
    const bool visible = unit(rng) >= invisible_probability;
    person.keypoints.push_back({box.x1 + u * box.width(), box.y1 + v * box.height(), visible});
  }
  return person;
}

Scene gen_scene(const SceneParams& params) {
  if (params.n_persons < 0) throw std::invalid_argument("gen_scene: n_persons must be >= 0");
  if (params.joints < 1) throw std::invalid_argument("gen_scene: joints must be >= 1");
  const double q = params.box_quantum;
  const double limit = params.size - std::max(q, 1.0);
  if (params.min_box_width > limit) throw SceneError("gen_scene: boxes do not fit the image");

  Scene scene;
  scene.width = scene.height = params.size;
  scene.joints = params.joints;
  scene.seed = params.seed;

  std::mt19937_64 rng(params.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

  std::vector<Box> boxes;
  int rejections = 0;
  while (static_cast<int>(boxes.size()) < params.n_persons) {
    double w = quantize(uniform(params.min_box_width, params.max_box_width), q);
    double h = quantize(w * uniform(params.min_aspect, params.max_aspect), q);
    w = std::clamp(w, std::max(q, 1.0), limit);
    h = std::clamp(h, std::max(q, 1.0), limit);
    double x1 = uniform(0.0, limit - w);
    double y1 = uniform(0.0, limit - h);
    if (q > 0) {
      x1 = std::floor(x1 / q) * q;
      y1 = std::floor(y1 / q) * q;
    }
    const Box candidate{x1, y1, x1 + w, y1 + h, 1.0};
    const bool ok = std::all_of(boxes.begin(), boxes.end(), [&](const Box& b) {
      return iou(b, candidate) <= params.overlap_level;
    });
    if (ok) {
      boxes.push_back(candidate);
    } else if (++rejections > kMaxRejections) {
      throw SceneError("gen_scene: infeasible packing after " + std::to_string(kMaxRejections) +
                       " rejections");
    }
  }
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    scene.persons.push_back(make_person(boxes[i], params.joints, params.keypoint_jitter,
                                        params.invisible_probability, rng()));
  }
  return scene;
}

int heatmap_cells(int pixels, double stride) {
  return std::max(1, static_cast<int>(std::ceil(pixels / stride - 1e-9)));
}

namespace {

// Maps a scale-1 cell index onto a grid whose size ratio to the base grid is r.
double rescale_index(double base_index, double r) { return (base_index + 0.5) * r - 0.5; }

double round_cell(double v, int size) {
  return std::clamp(std::floor(v + 0.5), 0.0, static_cast<double>(size - 1));
}

void add_noise(Grid& g, double amplitude, std::mt19937_64& rng) {
  if (amplitude <= 0) return;
  std::uniform_real_distribution<double> noise(-amplitude, amplitude);
  for (float& v : g.values()) v = static_cast<float>(std::clamp(v + noise(rng), 0.0, 1.0));
}

}  // namespace

HeatmapBundle render_scene(const Scene& scene, const RenderOptions& o) {
  if (!(o.stride > 0) || !(o.scale > 0)) throw std::invalid_argument("render_scene: stride and scale must be > 0");
  const int base_h = heatmap_cells(scene.height, o.stride);
  const int base_w = heatmap_cells(scene.width, o.stride);
  const int h = heatmap_cells(static_cast<int>(std::lround(scene.height * o.scale)), o.stride);
  const int w = heatmap_cells(static_cast<int>(std::lround(scene.width * o.scale)), o.stride);
  const double ry = static_cast<double>(h) / base_h;
  const double rx = static_cast<double>(w) / base_w;

  HeatmapBundle b{Grid(h, w, scene.joints), Grid(h, w, 1), Grid(h, w, 1), Grid(h, w, 1),
                  o.stride / o.scale};
  for (const Person& p : scene.persons) {
    for (int k = 0; k < scene.joints && k < static_cast<int>(p.keypoints.size()); ++k) {
      const SceneKeypoint& kp = p.keypoints[k];
      if (!kp.visible) continue;
      const double x = rescale_index(kp.x / o.stride, rx);
      const double y = rescale_index(kp.y / o.stride, ry);
      if (x < -0.5 || x >= w - 0.5 || y < -0.5 || y >= h - 0.5) continue;
      render_gaussian(b.pose, k, x, y, o.sigma);
    }
    const Box& box = p.box;
    render_gaussian(b.center, 0, round_cell(rescale_index(box.center_x() / o.stride, rx), w),
                    round_cell(rescale_index(box.center_y() / o.stride, ry), h), o.sigma);
    render_gaussian(b.top_left, 0, round_cell(rescale_index(box.x1 / o.stride, rx), w),
                    round_cell(rescale_index(box.y1 / o.stride, ry), h), o.sigma);
    render_gaussian(b.bottom_right, 0, round_cell(rescale_index(box.x2 / o.stride, rx), w),
                    round_cell(rescale_index(box.y2 / o.stride, ry), h), o.sigma);
  }
  std::mt19937_64 rng(o.noise_seed);
  add_noise(b.pose, o.noise, rng);
  add_noise(b.center, o.noise, rng);
  add_noise(b.top_left, o.noise, rng);
  add_noise(b.bottom_right, o.noise, rng);
  return b;
}

std::string scene_to_json(const Scene& scene) {
  nlohmann::json j;
  j["width"] = scene.width;
  j["height"] = scene.height;
  j["joints"] = scene.joints;
  j["seed"] = scene.seed;
  j["persons"] = nlohmann::json::array();
  for (const Person& p : scene.persons) {
    nlohmann::json kps = nlohmann::json::array();
    for (const SceneKeypoint& k : p.keypoints) {
      kps.push_back(k.x);
      kps.push_back(k.y);
      kps.push_back(k.visible ? 2 : 0);
    }
    j["persons"].push_back({{"bbox", {p.box.x1, p.box.y1, p.box.x2, p.box.y2}}, {"keypoints", kps}});
  }
  return j.dump(2);
}

Scene scene_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  Scene scene;
  scene.width = j.at("width").get<int>();
  scene.height = j.at("height").get<int>();
  scene.joints = j.at("joints").get<int>();
  scene.seed = j.value("seed", std::uint64_t{0});
  for (const auto& p : j.at("persons")) {
    const auto& bb = p.at("bbox");
    Person person{{bb.at(0).get<double>(), bb.at(1).get<double>(), bb.at(2).get<double>(),
                   bb.at(3).get<double>(), 1.0},
                  {}};
    const auto& kps = p.at("keypoints");
    if (kps.size() != static_cast<std::size_t>(3 * scene.joints)) {
      throw std::invalid_argument("scene JSON: keypoint triplet count does not match joints");
    }
    for (std::size_t i = 0; i < kps.size(); i += 3) {
      person.keypoints.push_back(
          {kps[i].get<double>(), kps[i + 1].get<double>(), kps[i + 2].get<double>() > 0});
    }
    scene.persons.push_back(std::move(person));
  }
  return scene;
}

}  // namespace pointpose
