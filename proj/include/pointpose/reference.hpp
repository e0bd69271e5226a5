#pragma once

#include <vector>

#include "pointpose/diff/layers.hpp"
#include "pointpose/grid.hpp"
#include "pointpose/pointops.hpp"

// Serial, definition-level implementations. They are deliberately naive and
// exist to check the optimized kernels and to give the benchmarks a baseline.
namespace pointpose::reference {

/// O(H * W * (H + W)) per channel.
Grid center_pool(const Grid& g);

/// Direct scan from every cell; O(H * W * (H + W)) per channel.
Grid cascade_corner_pool(const Grid& g, PoolKind kind);

std::vector<Point> local_peaks(const Grid& g, double threshold);

Grid64 conv2d(const Grid64& x, const diff::ConvLayer& layer);

/// Samples the input bilinearly at each sample position with no precomputation.
Grid64 roialign(const Grid64& x, const Box& box, const diff::RoiAlignParams& p);

double bilinear_sample(const Grid64& x, double cy, double cx, int channel);

}  // namespace pointpose::reference
