#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace pointpose {

struct BenchRow {
  std::string kernel;
  int size = 0;  // grid side in cells
  int iters = 0;
  double ns_per_op = 0;
};

/// Times center pooling, both cascade corner pools (single-channel size x size
/// grids) and full pose decoding (17 joints) at each size. Each figure is the
/// fastest repeat of `iters` calls, after one warm-up repeat, over at least 15
/// repeats and 200 ms. A non-empty `kernels` restricts the run to those names.
std::vector<BenchRow> run_bench(std::span<const int> sizes, int iters, std::uint64_t seed = 0,
                                const std::vector<std::string>& kernels = {});

/// Least-squares slope of log2(ns_per_op) against log2(size) for one kernel,
/// as the time factor per doubling of the side (4 for O(side^2)).
double doubling_factor(const std::vector<BenchRow>& rows, const std::string& kernel);

/// Header `kernel,size,iters,ns_per_op`.
std::string bench_to_csv(const std::vector<BenchRow>& rows);

}  // namespace pointpose
