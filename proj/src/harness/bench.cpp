#include "pointpose/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <stdexcept>

#include "pointpose/decode.hpp"
#include "pointpose/pointops.hpp"
#include "pointpose/scene.hpp"

namespace pointpose {

namespace {

template <typename F>
double fastest_ns_per_op(int iters, F&& f) {
  using clock = std::chrono::steady_clock;
  for (int i = 0; i < iters; ++i) f();  // warm-up
  double best = 1e300;
  const auto start = clock::now();
  for (int repeat = 0; repeat < 1000; ++repeat) {
    const auto t0 = clock::now();
    for (int i = 0; i < iters; ++i) f();
    const auto t1 = clock::now();
    best = std::min(best, std::chrono::duration<double, std::nano>(t1 - t0).count() / iters);
    if (repeat + 1 >= 15 && t1 - start >= std::chrono::milliseconds(200)) break;
  }
  return best;
}

Grid random_grid(int size, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> unit(0.0f, 1.0f);
  Grid g(size, size, 1);
  for (float& v : g.values()) v = unit(rng);
  return g;
}

}  // namespace

std::vector<BenchRow> run_bench(std::span<const int> sizes, int iters, std::uint64_t seed,
                                const std::vector<std::string>& kernels) {
  if (iters < 1) throw std::invalid_argument("run_bench: iters must be >= 1");
  for (const std::string& k : kernels) {
    if (k != "center_pool" && k != "cascade_top_left" && k != "cascade_bottom_right" && k != "decode") {
      throw std::invalid_argument("run_bench: unknown kernel '" + k + "'");
    }
  }
  auto wanted = [&](const char* name) {
    return kernels.empty() || std::find(kernels.begin(), kernels.end(), name) != kernels.end();
  };
  std::vector<BenchRow> rows;
  for (int size : sizes) {
    if (size < 1) throw std::invalid_argument("run_bench: sizes must be >= 1");
    const Grid g = random_grid(size, seed + size);
    volatile float sink = 0;
    if (wanted("center_pool")) {
      rows.push_back({"center_pool", size, iters,
                      fastest_ns_per_op(iters, [&] { sink = center_pool(g).at(0, 0, 0); })});
    }
    if (wanted("cascade_top_left")) {
      rows.push_back({"cascade_top_left", size, iters, fastest_ns_per_op(iters, [&] {
                        sink = cascade_corner_pool(g, PoolKind::CascadeTopLeft).at(0, 0, 0);
                      })});
    }
    if (wanted("cascade_bottom_right")) {
      rows.push_back({"cascade_bottom_right", size, iters, fastest_ns_per_op(iters, [&] {
                        sink = cascade_corner_pool(g, PoolKind::CascadeBottomRight).at(0, 0, 0);
                      })});
    }
    volatile std::size_t count = 0;
    if (wanted("decode")) {
      SceneParams params;
      params.size = size * 4;
      params.n_persons = std::clamp(size / 32, 1, 5);
      params.overlap_level = 0.1;
      params.min_box_width = std::min(32.0, params.size / 4.0);
      params.max_box_width = std::min(80.0, params.size / 3.0);
      params.seed = seed;
      const HeatmapBundle bundle = render_scene(gen_scene(params), RenderOptions{});
      const DecodeConfig cfg;
      rows.push_back({"decode", size, iters,
                      fastest_ns_per_op(iters, [&] { count = decode_poses(bundle, cfg).size(); })});
    }
    (void)sink;
    (void)count;
  }
  return rows;
}

double doubling_factor(const std::vector<BenchRow>& rows, const std::string& kernel) {
  double n = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const BenchRow& r : rows) {
    if (r.kernel != kernel) continue;
    const double x = std::log2(r.size);
    const double y = std::log2(r.ns_per_op);
    n += 1;
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double denom = n * sxx - sx * sx;
  if (n < 2 || denom <= 0) throw std::invalid_argument("doubling_factor: need two sizes of " + kernel);
  return std::exp2((n * sxy - sx * sy) / denom);
}

std::string bench_to_csv(const std::vector<BenchRow>& rows) {
  std::string out = "kernel,size,iters,ns_per_op\n";
  char line[160];
  for (const BenchRow& r : rows) {
    std::snprintf(line, sizeof line, "%s,%d,%d,%.1f\n", r.kernel.c_str(), r.size, r.iters, r.ns_per_op);
    out += line;
  }
  return out;
}

}  // namespace pointpose
