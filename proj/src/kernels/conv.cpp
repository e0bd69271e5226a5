#include <stdexcept>

#include "pointpose/diff/layers.hpp"

namespace pointpose::diff {

ConvLayer::ConvLayer(int in, int out, int k)
    : kernel_size(k), in_channels(in), out_channels(out), weight(k, k, in * out), bias(1, 1, out) {
  if (k < 1 || k % 2 == 0) throw std::invalid_argument("ConvLayer: kernel size must be odd");
}

ConvLayer ConvLayer::identity(int channels, int k) {
  ConvLayer layer(channels, channels, k);
  for (int c = 0; c < channels; ++c) layer.w(k / 2, k / 2, c, c) = 1.0;
  return layer;
}

namespace {

void check_input(int channels, const ConvLayer& layer) {
  if (channels != layer.in_channels) {
    throw std::invalid_argument("conv2d: input has " + std::to_string(channels) +
                                " channels, layer expects " + std::to_string(layer.in_channels));
  }
}

}  // namespace

template <typename T>
BasicGrid<T> conv2d_forward(const BasicGrid<T>& x, const ConvLayer& layer) {
  check_input(x.channels(), layer);
  const int h = x.height();
  const int w = x.width();
  const int k = layer.kernel_size;
  const int r = k / 2;
  const int cin = layer.in_channels;
  const int cout = layer.out_channels;
  BasicGrid<T> out(h, w, cout);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    std::vector<double> acc(cout);
    for (int xo = 0; xo < w; ++xo) {
      for (int co = 0; co < cout; ++co) acc[co] = layer.bias.at(0, 0, co);
      for (int ky = 0; ky < k; ++ky) {
        const int yi = y + ky - r;
        if (yi < 0 || yi >= h) continue;
        for (int kx = 0; kx < k; ++kx) {
          const int xi = xo + kx - r;
          if (xi < 0 || xi >= w) continue;
          for (int ci = 0; ci < cin; ++ci) {
            const double v = x.at(yi, xi, ci);
            const double* wrow = &layer.weight.at(ky, kx, ci * cout);
            for (int co = 0; co < cout; ++co) acc[co] += wrow[co] * v;
          }
        }
      }
      for (int co = 0; co < cout; ++co) out.at(y, xo, co) = static_cast<T>(acc[co]);
    }
  }
  return out;
}

template BasicGrid<float> conv2d_forward(const BasicGrid<float>&, const ConvLayer&);
template BasicGrid<double> conv2d_forward(const BasicGrid<double>&, const ConvLayer&);

ConvGrads conv2d_backward(const Grid64& x, const ConvLayer& layer, const Grid64& grad_out) {
  check_input(x.channels(), layer);
  if (grad_out.height() != x.height() || grad_out.width() != x.width() ||
      grad_out.channels() != layer.out_channels) {
    throw std::invalid_argument("conv2d_backward: grad_out shape mismatch");
  }
  const int h = x.height();
  const int w = x.width();
  const int k = layer.kernel_size;
  const int r = k / 2;
  const int cin = layer.in_channels;
  const int cout = layer.out_channels;
  ConvGrads g{Grid64(h, w, cin), Grid64(k, k, cin * cout), Grid64(1, 1, cout)};

  for (int y = 0; y < h; ++y)
    for (int xo = 0; xo < w; ++xo)
      for (int co = 0; co < cout; ++co) g.bias.at(0, 0, co) += grad_out.at(y, xo, co);

  for (int y = 0; y < h; ++y) {
    for (int xo = 0; xo < w; ++xo) {
      const double* go = &grad_out.at(y, xo, 0);
      for (int ky = 0; ky < k; ++ky) {
        const int yi = y + ky - r;
        if (yi < 0 || yi >= h) continue;
        for (int kx = 0; kx < k; ++kx) {
          const int xi = xo + kx - r;
          if (xi < 0 || xi >= w) continue;
          for (int ci = 0; ci < cin; ++ci) {
            const double v = x.at(yi, xi, ci);
            const double* wrow = &layer.weight.at(ky, kx, ci * cout);
            double* gw = &g.weight.at(ky, kx, ci * cout);
            double gx = 0;
            for (int co = 0; co < cout; ++co) {
              gw[co] += go[co] * v;
              gx += go[co] * wrow[co];
            }
            g.input.at(yi, xi, ci) += gx;
          }
        }
      }
    }
  }
  return g;
}

}  // namespace pointpose::diff
