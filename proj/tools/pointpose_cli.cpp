#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "pointpose/bench.hpp"
#include "pointpose/decode.hpp"
#include "pointpose/diff/checkpoint.hpp"
#include "pointpose/metrics.hpp"
#include "pointpose/mimic.hpp"
#include "pointpose/results.hpp"
#include "pointpose/scene.hpp"

namespace fs = std::filesystem;
using namespace pointpose;

namespace {

// Multi-scale bundles live in DIR/scale_<s>/ next to the scale-1 bundle in DIR.
fs::path scale_dir(const fs::path& root, double scale) {
  char name[32];
  std::snprintf(name, sizeof name, "scale_%.2f", scale);
  return root / name;
}

struct RenderArgs {
  std::uint64_t seed = 0;
  int persons = 3;
  double overlap = 0.0;
  double noise = 0.0;
  int size = 256;
  int joints = 17;
  std::vector<double> scales;
  std::string out;
};

int run_render(const RenderArgs& a) {
  SceneParams params;
  params.seed = a.seed;
  params.n_persons = a.persons;
  params.overlap_level = a.overlap;
  params.size = a.size;
  params.joints = a.joints;
  const Scene scene = gen_scene(params);

  RenderOptions options;
  options.noise = a.noise;
  options.noise_seed = a.seed;
  const fs::path out = a.out;
  write_bundle(render_scene(scene, options), out);
  for (double s : a.scales) {
    RenderOptions scaled = options;
    scaled.scale = s;
    write_bundle(render_scene(scene, scaled), scale_dir(out, s));
  }
  write_text_file(out / "scene.json", scene_to_json(scene));
  return 0;
}

struct DecodeArgs {
  std::string bundle;
  DecodeConfig cfg;
  std::vector<double> scales;
  std::string out;
};

int run_decode(const DecodeArgs& a) {
  HeatmapBundle bundle;
  if (a.scales.empty()) {
    bundle = read_bundle(a.bundle);
  } else {
    std::vector<std::pair<HeatmapBundle, double>> parts;
    for (double s : a.scales) parts.emplace_back(read_bundle(scale_dir(a.bundle, s)), s);
    bundle = multi_scale_fuse(parts);
  }
  a.cfg.validate();
  const auto persons = to_pixels(decode_poses(bundle, a.cfg), bundle.stride);
  write_text_file(a.out, results_to_json(persons));
  return 0;
}

int run_eval(const std::string& pred, const std::string& scene_path, double pck_tau, double iou_tau) {
  Evaluator ev(pck_tau, iou_tau);
  ev.add(results_from_json(read_text_file(pred)), scene_from_json(read_text_file(scene_path)));
  const EvalReport r = ev.report();
  const nlohmann::json j = {{"pck", r.pck},
                            {"det_precision", r.det_precision},
                            {"det_recall", r.det_recall},
                            {"pck_tau", pck_tau},
                            {"iou_tau", iou_tau}};
  std::cout << j.dump(2) << "\n";
  return 0;
}

int run_mimic_train(const std::string& config, const std::string& out) {
  const mimic::MimicConfig cfg = mimic::MimicConfig::from_map(parse_config(read_text_file(config)));
  const fs::path dir = out;
  fs::create_directories(dir);
  auto sink = [&](int step, const mimic::StudentState& state) {
    const std::string name = step == cfg.steps ? "checkpoint.bin" : "checkpoint_" + std::to_string(step) + ".bin";
    diff::write_checkpoint_file(state.checkpoint(), dir / name);
  };
  const mimic::ScheduleResult result = mimic::run_mimic_schedule(cfg, mimic::default_scene_stream(cfg), sink);
  write_text_file(dir / "report.csv", result.report.to_csv());
  return 0;
}

int run_bench_command(const std::vector<int>& sizes, int iters, std::uint64_t seed,
                      const std::vector<std::string>& kernels) {
  std::cout << bench_to_csv(run_bench(sizes, iters, seed, kernels));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Center-point pose decoding toolkit"};
  app.require_subcommand(1);

  RenderArgs render;
  auto* r = app.add_subcommand("render", "Generate a synthetic scene and write its heatmap bundle");
  r->add_option("--seed", render.seed)->required();
  r->add_option("--persons", render.persons)->required()->check(CLI::NonNegativeNumber);
  r->add_option("--overlap", render.overlap)->required()->check(CLI::Range(0.0, 1.0));
  r->add_option("--noise", render.noise)->check(CLI::Range(0.0, 1.0));
  r->add_option("--size", render.size)->check(CLI::PositiveNumber);
  r->add_option("--joints", render.joints)->check(CLI::PositiveNumber);
  r->add_option("--scales", render.scales, "Also write DIR/scale_<s>/ bundles")->delimiter(',');
  r->add_option("--out", render.out)->required();

  DecodeArgs decode;
  auto* d = app.add_subcommand("decode", "Decode a bundle into person poses (pixel coordinates)");
  d->add_option("--bundle", decode.bundle)->required();
  d->add_option("--phi-det", decode.cfg.phi_det);
  d->add_option("--phi-pose", decode.cfg.phi_pose);
  d->add_option("--top-n", decode.cfg.top_n);
  d->add_option("--scales", decode.scales, "Fuse DIR/scale_<s>/ bundles")->delimiter(',');
  d->add_option("--out", decode.out)->required();

  std::string pred, scene_path;
  double pck_tau = 0.1, iou_tau = 0.5;
  auto* e = app.add_subcommand("eval", "Score decoded poses against a scene");
  e->add_option("--pred", pred)->required();
  e->add_option("--scene", scene_path)->required();
  e->add_option("--pck-tau", pck_tau);
  e->add_option("--iou-tau", iou_tau);

  std::string config, run_dir;
  auto* m = app.add_subcommand("mimic-train", "Run the two-stage mimic schedule");
  m->add_option("--config", config)->required()->check(CLI::ExistingFile);
  m->add_option("--out", run_dir)->required();

  std::vector<int> sizes{64, 128, 256};
  int iters = 100;
  std::uint64_t bench_seed = 0;
  std::vector<std::string> kernels;
  auto* b = app.add_subcommand("bench", "Time pooling and decoding, CSV on stdout");
  b->add_option("--sizes", sizes)->delimiter(',');
  b->add_option("--iters", iters)->check(CLI::PositiveNumber);
  b->add_option("--seed", bench_seed);
  b->add_option("--kernels", kernels)->delimiter(',');

  CLI11_PARSE(app, argc, argv);

  try {
    if (*r) return run_render(render);
    if (*d) return run_decode(decode);
    if (*e) return run_eval(pred, scene_path, pck_tau, iou_tau);
    if (*m) return run_mimic_train(config, run_dir);
    if (*b) return run_bench_command(sizes, iters, bench_seed, kernels);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
  return 0;
}
