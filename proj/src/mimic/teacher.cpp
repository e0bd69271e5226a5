#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "pointpose/mimic.hpp"

namespace pointpose::mimic {

int owner_of(const Scene& scene, const Box& box_cells, double stride) {
  int owner = -1;
  double best = 0.0;
  for (std::size_t i = 0; i < scene.persons.size(); ++i) {
    const double v = iou(box_cells, scene.persons[i].box.scaled(1.0 / stride));
    if (v > best) {
      best = v;
      owner = static_cast<int>(i);
    }
  }
  return owner;
}

Grid extract_student_roi(const Grid& student_pose, const Box& box_cells, int r) {
  return diff::roialign_forward(student_pose, box_cells, diff::RoiAlignParams{r, r, 2});
}

TeacherBundle make_synthetic_teacher(const Scene& scene, const Box& box_cells,
                                     const TeacherOptions& o) {
  if (o.resolution < 1) throw std::invalid_argument("make_synthetic_teacher: resolution must be >= 1");
  if (!(box_cells.x1 < box_cells.x2 && box_cells.y1 < box_cells.y2)) {
    throw std::invalid_argument("make_synthetic_teacher: degenerate box");
  }
  const int owner = owner_of(scene, box_cells, o.stride);
  if (owner < 0) throw std::invalid_argument("make_synthetic_teacher: box overlaps no scene person");

  const int r = o.resolution;
  const double sx = r / box_cells.width();
  const double sy = r / box_cells.height();
  const double sigma = o.sigma * std::sqrt(sx * sy);
  TeacherBundle t{Grid(r, r, scene.joints), Grid(r, r, scene.joints), box_cells, owner};
  const Person& person = scene.persons[owner];
  for (int k = 0; k < scene.joints; ++k) {
    const SceneKeypoint& kp = person.keypoints[k];
    if (!kp.visible) continue;
    const double x = crop_coordinate(kp.x / o.stride, box_cells.x1, box_cells.x2, r);
    const double y = crop_coordinate(kp.y / o.stride, box_cells.y1, box_cells.y2, r);
    if (x < -0.5 || x >= r - 0.5 || y < -0.5 || y >= r - 0.5) continue;
    render_gaussian(t.gt, k, x, y, sigma);
  }
  t.pred = t.gt;
  if (o.noise > 0) {
    std::mt19937_64 rng(o.seed);
    std::uniform_real_distribution<double> noise(-o.noise, o.noise);
    for (float& v : t.pred.values()) v = static_cast<float>(std::clamp(v + noise(rng), 0.0, 1.0));
  }
  return t;
}

}  // namespace pointpose::mimic
