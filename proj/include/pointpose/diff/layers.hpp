#pragma once

#include "pointpose/grid.hpp"

namespace pointpose::diff {

/// Same-padding k x k convolution (cross-correlation) with bias.
///
/// Weights are stored as a k x k x (in * out) grid: tap (ky, kx) connecting
/// input channel ci to output channel co lives in channel ci * out + co.
struct ConvLayer {
  int kernel_size = 3;
  int in_channels = 1;
  int out_channels = 1;
  Grid64 weight;
  Grid64 bias;

  ConvLayer(int in, int out, int k = 3);

  /// Center tap 1 on matching channels, everything else 0.
  static ConvLayer identity(int channels, int k = 3);

  double& w(int ky, int kx, int ci, int co) { return weight.at(ky, kx, ci * out_channels + co); }
  double w(int ky, int kx, int ci, int co) const {
    return weight.at(ky, kx, ci * out_channels + co);
  }
};

template <typename T>
BasicGrid<T> conv2d_forward(const BasicGrid<T>& x, const ConvLayer& layer);

struct ConvGrads {
  Grid64 input;
  Grid64 weight;
  Grid64 bias;
};

ConvGrads conv2d_backward(const Grid64& x, const ConvLayer& layer, const Grid64& grad_out);

struct RoiAlignParams {
  int out_h = 16;
  int out_w = 16;
  int samples_per_bin = 2;
};

/// Clamps the box to the grid extent [0, W] x [0, H] in the half-pixel frame.
/// Throws std::invalid_argument if the clamped box is empty.
Box clamp_roi(const Box& box, int height, int width);

/// Each output bin averages samples_per_bin^2 bilinear samples taken at
/// regular offsets inside the bin. Box coordinates are continuous, with cell
/// (i, j) centered at (j + 0.5, i + 0.5).
template <typename T>
BasicGrid<T> roialign_forward(const BasicGrid<T>& x, const Box& box, const RoiAlignParams& p);

/// Gradient w.r.t. the input grid; the box is treated as a constant.
Grid64 roialign_backward(int in_h, int in_w, const Box& box, const RoiAlignParams& p,
                         const Grid64& grad_out);

}  // namespace pointpose::diff
