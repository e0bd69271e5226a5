#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "pointpose/bench.hpp"
#include "pointpose/metrics.hpp"
#include "pointpose/pointops.hpp"
#include "pointpose/results.hpp"
#include "pointpose/scene.hpp"

using namespace pointpose;

namespace {

std::vector<PersonPose> perfect_predictions(const Scene& scene) {
  std::vector<PersonPose> out;
  for (const Person& p : scene.persons) {
    PersonPose pose{p.box, {}};
    for (const SceneKeypoint& k : p.keypoints) pose.keypoints.push_back({k.x, k.y, 1.0, k.visible});
    out.push_back(pose);
  }
  return out;
}

Scene two_person_scene() {
  Scene s;
  s.joints = 2;
  s.persons.push_back({{0, 0, 30, 40, 1}, {{10, 10, true}, {20, 30, true}}});
  s.persons.push_back({{100, 100, 130, 140, 1}, {{110, 110, true}, {120, 130, false}}});
  return s;
}

}  // namespace

TEST_CASE("gen_scene examples") {
  SceneParams p;
  p.n_persons = 0;
  CHECK(gen_scene(p).persons.empty());

  p.n_persons = 4;
  p.seed = 12;
  CHECK(gen_scene(p) == gen_scene(p));

  p.seed = 13;
  const Scene s = gen_scene(p);
  for (const Person& person : s.persons) {
    CHECK(person.keypoints.size() == 17);
    CHECK(person.box.x1 >= 0);
    CHECK(person.box.x2 <= s.width);
    CHECK(std::fmod(person.box.x1, 4.0) == 0.0);
  }
}

TEST_CASE("gen_scene overlap_level 0 keeps boxes apart") {
  double worst = 0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    SceneParams p;
    p.n_persons = 1 + static_cast<int>(seed % 5);
    p.seed = seed;
    const auto boxes = gen_scene(p).boxes();
    for (std::size_t i = 0; i < boxes.size(); ++i)
      for (std::size_t j = i + 1; j < boxes.size(); ++j) worst = std::max(worst, iou(boxes[i], boxes[j]));
  }
  CHECK(worst < 0.05);
}

TEST_CASE("gen_scene gives up on impossible packings") {
  SceneParams p;
  p.n_persons = 60;
  p.size = 128;
  CHECK_THROWS_AS(gen_scene(p), SceneError);
}

TEST_CASE("render_scene examples") {
  SceneParams p;
  p.n_persons = 1;
  p.seed = 3;
  const Scene s = gen_scene(p);
  const HeatmapBundle b = render_scene(s, RenderOptions{});
  const auto peaks = local_peaks(b.center, 0.01);
  REQUIRE(peaks.size() == 1);
  CHECK(peaks[0].x == std::round(s.persons[0].box.center_x() / 4));
  CHECK(peaks[0].y == std::round(s.persons[0].box.center_y() / 4));
  CHECK(b.height() == 64);
  CHECK(b.joints() == 17);

  Scene empty;
  const HeatmapBundle z = render_scene(empty, RenderOptions{});
  for (const Grid* g : {&z.pose, &z.center, &z.top_left, &z.bottom_right})
    for (float v : g->values()) CHECK(v == 0.0f);

  RenderOptions noisy;
  noisy.noise = 0.2;
  noisy.noise_seed = 9;
  const HeatmapBundle n1 = render_scene(s, noisy), n2 = render_scene(s, noisy);
  CHECK(n1.pose == n2.pose);
  for (float v : n1.pose.values()) REQUIRE((v >= 0.0f && v <= 1.0f));

  RenderOptions half;
  half.scale = 0.5;
  const HeatmapBundle small = render_scene(s, half);
  CHECK(small.height() == 32);
  CHECK(small.stride == 8.0);
}

TEST_CASE("pck examples") {
  const Scene s = two_person_scene();
  CHECK(pck(perfect_predictions(s), s, 0.1) == 1.0);
  CHECK(pck({}, s, 0.1) == 0.0);

  Scene one;
  one.joints = 2;
  one.persons.push_back(s.persons[0]);
  auto pred = perfect_predictions(one);
  pred[0].keypoints[1].x += 0.1 * std::hypot(30.0, 40.0) + 0.5;
  CHECK(pck(pred, one, 0.1) == 0.5);
  pred[0].keypoints[1].present = false;
  CHECK(pck(pred, one, 0.1) == 0.5);
  CHECK_THROWS_AS(pck(pred, one, 0.0), std::invalid_argument);
}

TEST_CASE("det_pr examples") {
  const Scene s = two_person_scene();
  const auto gt = s.boxes();
  const DetectionPR same = det_pr(gt, gt, 0.5);
  CHECK(same.precision == 1.0);
  CHECK(same.recall == 1.0);

  const DetectionPR none = det_pr({}, gt, 0.5);
  CHECK(none.precision == 1.0);
  CHECK(none.recall == 0.0);

  const DetectionPR half = det_pr({gt[0], {200, 200, 220, 220, 0.9}}, gt, 0.5);
  CHECK(half.precision == 0.5);
  CHECK(half.recall == 0.5);
  CHECK_THROWS_AS(det_pr(gt, gt, 1.0), std::invalid_argument);
}

TEST_CASE("greedy_match takes predictions by descending score") {
  const std::vector<Box> gt{{0, 0, 10, 10, 0}};
  const std::vector<Box> pred{{0, 0, 10, 9, 0.2}, {1, 0, 10, 10, 0.8}};
  const auto m = greedy_match(pred, gt, 0.5);
  CHECK(m[0] == -1);
  CHECK(m[1] == 0);
}

TEST_CASE("evaluator pools counts") {
  const Scene s = two_person_scene();
  Evaluator eval(0.1, 0.5);
  eval.add(perfect_predictions(s), s);
  eval.add({}, s);
  const EvalReport r = eval.report();
  CHECK(r.pck == 0.5);
  CHECK(r.det_recall == 0.5);
  CHECK(r.per_scene.size() == 2);
  CHECK(r.mean_scene_pck() == 0.5);
}

TEST_CASE("mean PCK does not increase with noise") {
  const double levels[] = {0.0, 0.05, 0.1, 0.2};
  std::vector<double> means;
  for (double noise : levels) {
    Evaluator eval(0.1, 0.5);
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
      SceneParams p;
      p.n_persons = 1 + static_cast<int>(seed % 5);
      p.seed = seed;
      const Scene scene = gen_scene(p);
      RenderOptions o;
      o.noise = noise;
      o.noise_seed = seed;
      const HeatmapBundle b = render_scene(scene, o);
      eval.add(to_pixels(decode_poses(b, DecodeConfig{}), b.stride), scene);
    }
    means.push_back(eval.report().mean_scene_pck());
  }
  int inversions = 0;
  for (std::size_t i = 1; i < means.size(); ++i) {
    if (means[i] > means[i - 1]) {
      ++inversions;
      CHECK(means[i] - means[i - 1] <= 0.005);
    }
  }
  CHECK(inversions <= 1);
}

TEST_CASE("to_pixels scales boxes and present keypoints") {
  std::vector<PersonPose> cells{{{1, 2, 3, 4, 0.7}, {{1.5, 2.5, 0.9, true}, {0, 0, 0, false}}}};
  const auto px = to_pixels(cells, 4.0);
  CHECK(px[0].box == Box{4, 8, 12, 16, 0.7});
  CHECK(px[0].keypoints[0].x == 6.0);
  CHECK_FALSE(px[0].keypoints[1].present);
}

TEST_CASE("results JSON round trip") {
  std::vector<PersonPose> persons{{{4, 8, 12, 16, 0.75}, {{6.25, 10, 0.9, true}, {0, 0, 0, false}}},
                                  {{20, 24, 40, 60, 0.5}, {{30, 40, 0.4, true}, {31, 41, 0.3, true}}}};
  const std::string text = results_to_json(persons);
  // Keypoint scores are not serialized.
  for (PersonPose& p : persons)
    for (Keypoint& k : p.keypoints) k.score = 0;
  CHECK(results_from_json(text) == persons);
  CHECK(results_to_json({}) == "[]\n");
}

TEST_CASE("scene JSON round trip") {
  SceneParams p;
  p.n_persons = 3;
  p.seed = 77;
  p.invisible_probability = 0.2;
  const Scene s = gen_scene(p);
  CHECK(scene_from_json(scene_to_json(s)) == s);
}

TEST_CASE("bundle directory round trip") {
  SceneParams p;
  p.seed = 4;
  const HeatmapBundle b = render_scene(gen_scene(p), RenderOptions{});
  const auto dir = std::filesystem::temp_directory_path() / "pointpose_unit_bundle";
  std::filesystem::remove_all(dir);
  write_bundle(b, dir);
  const HeatmapBundle back = read_bundle(dir);
  CHECK(back.pose == b.pose);
  CHECK(back.bottom_right == b.bottom_right);
  CHECK(back.stride == b.stride);
  std::filesystem::remove_all(dir);
}

TEST_CASE("config parser") {
  const auto kv = parse_config("# comment\nalpha = 1.5\n\n  steps=40  # trailing\n");
  CHECK(kv.at("alpha") == "1.5");
  CHECK(kv.at("steps") == "40");
  CHECK_THROWS_AS(parse_config("alpha = 1\nalpha = 2\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("alpha 1\n"), ConfigError);
  try {
    parse_config("a = 1\nb\n");
    FAIL("line without = accepted");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("bench rows and fitted slope") {
  const std::vector<int> sizes{8, 16};
  const auto rows = run_bench(sizes, 2, 0, {"center_pool"});
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].kernel == "center_pool");
  CHECK(bench_to_csv(rows).rfind("kernel,size,iters,ns_per_op\n", 0) == 0);
  const std::vector<BenchRow> quadratic{{"k", 10, 1, 100}, {"k", 20, 1, 400}, {"k", 40, 1, 1600}};
  CHECK(doubling_factor(quadratic, "k") == doctest::Approx(4.0));
  CHECK_THROWS_AS(run_bench(sizes, 1, 0, {"nope"}), std::invalid_argument);
}
