#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "pointpose/decode.hpp"
#include "pointpose/grid.hpp"

namespace pointpose {

struct SceneKeypoint {
  double x = 0;
  double y = 0;
  bool visible = true;

  friend bool operator==(const SceneKeypoint&, const SceneKeypoint&) = default;
};

/// Ground-truth person in input-pixel coordinates.
struct Person {
  Box box;
  std::vector<SceneKeypoint> keypoints;

  friend bool operator==(const Person&, const Person&) = default;
};

struct Scene {
  int width = 256;
  int height = 256;
  int joints = 17;
  std::uint64_t seed = 0;
  std::vector<Person> persons;

  std::vector<Box> boxes() const;
  friend bool operator==(const Scene&, const Scene&) = default;
};

struct SceneParams {
  int n_persons = 3;
  /// Maximum pairwise box IoU accepted by the rejection sampler.
  double overlap_level = 0.0;
  int size = 256;
  int joints = 17;
  std::uint64_t seed = 0;

  double min_box_width = 32;
  double max_box_width = 80;
  double min_aspect = 1.2;  // height / width
  double max_aspect = 1.8;
  /// Box corners are snapped to multiples of this many pixels.
  double box_quantum = 4;
  /// Uniform jitter of the stick-figure template, in box-relative units.
  double keypoint_jitter = 0.03;
  double invisible_probability = 0.0;
};

class SceneError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Rejection-samples person boxes and places jittered stick-figure keypoints
/// inside each. Throws SceneError after 10000 rejections.
Scene gen_scene(const SceneParams& params);

/// Places keypoints for one person inside `box` (pixels); exposed for
/// generators that construct boxes themselves.
Person make_person(const Box& box, int joints, double jitter, double invisible_probability,
                   std::uint64_t seed);

/// Normalised (u, v) position of joint k inside its box.
std::pair<double, double> joint_template(int k);

struct RenderOptions {
  double stride = 4.0;
  double sigma = 2.0;
  /// Uniform noise in [-noise, noise] added to every grid, then clamped to [0, 1].
  double noise = 0.0;
  std::uint64_t noise_seed = 0;
  /// Test-time scale; grids are ceil(size * scale / stride) cells.
  double scale = 1.0;
};

/// Pose Gaussians per visible keypoint; center/corner Gaussians at the box
/// center and corners (rounded to the nearest cell). At scale 1 a pixel
/// coordinate p maps to cell index p / stride; other scales use the
/// half-pixel-consistent mapping so bilinear resizing back to scale 1 lines up.
HeatmapBundle render_scene(const Scene& scene, const RenderOptions& options);

/// Base (scale 1) heatmap dimensions.
int heatmap_cells(int pixels, double stride);

std::string scene_to_json(const Scene& scene);
Scene scene_from_json(const std::string& text);

}  // namespace pointpose
