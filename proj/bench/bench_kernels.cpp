#include <benchmark/benchmark.h>

#include <random>

#include "pointpose/diff/layers.hpp"
#include "pointpose/pointops.hpp"
#include "pointpose/reference.hpp"

using namespace pointpose;

namespace {

Grid random_grid(int h, int w, int c) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  Grid g(h, w, c);
  for (float& v : g.values()) v = u(rng);
  return g;
}

Grid64 random_grid64(int h, int w, int c) {
  return Grid64::cast_from(random_grid(h, w, c));
}

void BM_CenterPool(benchmark::State& state) {
  const Grid g = random_grid(state.range(0), state.range(0), 1);
  for (auto _ : state) benchmark::DoNotOptimize(center_pool(g));
}

void BM_CenterPoolReference(benchmark::State& state) {
  const Grid g = random_grid(state.range(0), state.range(0), 1);
  for (auto _ : state) benchmark::DoNotOptimize(reference::center_pool(g));
}

void BM_CascadeTopLeft(benchmark::State& state) {
  const Grid g = random_grid(state.range(0), state.range(0), 1);
  for (auto _ : state) benchmark::DoNotOptimize(cascade_corner_pool(g, PoolKind::CascadeTopLeft));
}

void BM_CascadeTopLeftReference(benchmark::State& state) {
  const Grid g = random_grid(state.range(0), state.range(0), 1);
  for (auto _ : state)
    benchmark::DoNotOptimize(reference::cascade_corner_pool(g, PoolKind::CascadeTopLeft));
}

void BM_Conv2d(benchmark::State& state) {
  const Grid64 x = random_grid64(state.range(0), state.range(0), 17);
  const diff::ConvLayer layer = diff::ConvLayer::identity(17);
  for (auto _ : state) benchmark::DoNotOptimize(diff::conv2d_forward(x, layer));
}

void BM_Conv2dReference(benchmark::State& state) {
  const Grid64 x = random_grid64(state.range(0), state.range(0), 17);
  const diff::ConvLayer layer = diff::ConvLayer::identity(17);
  for (auto _ : state) benchmark::DoNotOptimize(reference::conv2d(x, layer));
}

void BM_RoiAlign(benchmark::State& state) {
  const Grid64 x = random_grid64(64, 64, 17);
  const Box box{8.3, 5.1, 40.7, 52.9, 1.0};
  const diff::RoiAlignParams p{static_cast<int>(state.range(0)), static_cast<int>(state.range(0)), 2};
  for (auto _ : state) benchmark::DoNotOptimize(diff::roialign_forward(x, box, p));
}

void BM_RoiAlignReference(benchmark::State& state) {
  const Grid64 x = random_grid64(64, 64, 17);
  const Box box{8.3, 5.1, 40.7, 52.9, 1.0};
  const diff::RoiAlignParams p{static_cast<int>(state.range(0)), static_cast<int>(state.range(0)), 2};
  for (auto _ : state) benchmark::DoNotOptimize(reference::roialign(x, box, p));
}

}  // namespace

BENCHMARK(BM_CenterPool)->RangeMultiplier(2)->Range(64, 512);
BENCHMARK(BM_CenterPoolReference)->RangeMultiplier(2)->Range(64, 256);
BENCHMARK(BM_CascadeTopLeft)->RangeMultiplier(2)->Range(64, 512);
BENCHMARK(BM_CascadeTopLeftReference)->RangeMultiplier(2)->Range(64, 128);
BENCHMARK(BM_Conv2d)->Arg(32)->Arg(64);
BENCHMARK(BM_Conv2dReference)->Arg(32)->Arg(64);
BENCHMARK(BM_RoiAlign)->Arg(8)->Arg(16)->Arg(32);
BENCHMARK(BM_RoiAlignReference)->Arg(8)->Arg(16)->Arg(32);

BENCHMARK_MAIN();
