#pragma once

#include <algorithm>
#include <cstdint>
#include <random>

#include "pointpose/diff/optim.hpp"
#include "pointpose/diff/tape.hpp"
#include "pointpose/grid.hpp"

namespace support {

using pointpose::Box;
using pointpose::Grid;
using pointpose::Grid64;
namespace diff = pointpose::diff;

/// Uniform values in [0, 1); with levels > 0 they are quantized to k / levels
/// so that ties are common.
inline Grid random_grid(std::mt19937_64& rng, int h, int w, int c, int levels = 0) {
  std::uniform_real_distribution<float> unit(0.0f, 1.0f);
  std::uniform_int_distribution<int> level(0, std::max(levels, 1));
  Grid g(h, w, c);
  for (float& v : g.values()) v = levels > 0 ? static_cast<float>(level(rng)) / levels : unit(rng);
  return g;
}

/// Values drawn from {-0, +0, -0.5, -1}: ties whose sign of zero depends on scan order.
inline Grid signed_zero_grid(std::mt19937_64& rng, int h, int w, int c) {
  constexpr float choices[] = {-0.0f, 0.0f, -0.5f, -1.0f};
  Grid g(h, w, c);
  for (float& v : g.values()) v = choices[rng() % 4];
  return g;
}

inline Grid64 random_grid64(std::mt19937_64& rng, int h, int w, int c, double lo = -1.0,
                            double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Grid64 g(h, w, c);
  for (double& v : g.values()) v = u(rng);
  return g;
}

inline int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// Each check builds a random instance of one op, reduces its output to a
// scalar with fixed random weights where needed, and compares the tape
// gradient with central differences. Returns the per-element relative errors
// of every differentiable input.

inline diff::GradCheckResult merge(std::initializer_list<diff::GradCheckResult> parts) {
  diff::GradCheckResult out;
  for (const auto& p : parts)
    out.relative_errors.insert(out.relative_errors.end(), p.relative_errors.begin(),
                               p.relative_errors.end());
  return out;
}

inline diff::GradCheckResult check_conv2d(std::mt19937_64& rng) {
  const int h = uniform_int(rng, 2, 6), w = uniform_int(rng, 2, 6);
  const int cin = uniform_int(rng, 1, 3), cout = uniform_int(rng, 1, 3);
  const int k = rng() % 2 == 0 ? 1 : 3;
  diff::ConvLayer layer(cin, cout, k);
  layer.weight = random_grid64(rng, k, k, cin * cout);
  layer.bias = random_grid64(rng, 1, 1, cout);
  const Grid64 x = random_grid64(rng, h, w, cin);
  const Grid64 reduce = random_grid64(rng, h, w, cout);

  auto loss = [&](const Grid64& xv, const diff::ConvLayer& l) {
    diff::Tape t;
    return t.scalar(diff::weighted_sum(t, diff::conv2d(t, t.constant(xv), diff::bind_constants(t, l)), reduce));
  };
  diff::Tape tape;
  const diff::Var xi = tape.input(x);
  const diff::ConvVars vars = diff::bind_parameters(tape, layer);
  tape.backward(diff::weighted_sum(tape, diff::conv2d(tape, xi, vars), reduce));

  auto with_weight = [&](const Grid64& wv) {
    diff::ConvLayer l = layer;
    l.weight = wv;
    return loss(x, l);
  };
  auto with_bias = [&](const Grid64& bv) {
    diff::ConvLayer l = layer;
    l.bias = bv;
    return loss(x, l);
  };
  return merge({diff::check_gradient([&](const Grid64& xv) { return loss(xv, layer); }, x, tape.grad(xi)),
                diff::check_gradient(with_weight, layer.weight, tape.grad(vars.weight)),
                diff::check_gradient(with_bias, layer.bias, tape.grad(vars.bias))});
}

inline diff::GradCheckResult check_roialign(std::mt19937_64& rng) {
  const int h = uniform_int(rng, 3, 8), w = uniform_int(rng, 3, 8), c = uniform_int(rng, 1, 2);
  const double x1 = uniform(rng, 0.0, w - 1.0), y1 = uniform(rng, 0.0, h - 1.0);
  const Box box{x1, y1, uniform(rng, x1 + 0.5, w), uniform(rng, y1 + 0.5, h), 1.0};
  const diff::RoiAlignParams p{uniform_int(rng, 1, 4), uniform_int(rng, 1, 4), uniform_int(rng, 1, 2)};
  const Grid64 x = random_grid64(rng, h, w, c);
  const Grid64 reduce = random_grid64(rng, p.out_h, p.out_w, c);
  auto loss = [&](const Grid64& xv) {
    diff::Tape t;
    return t.scalar(diff::weighted_sum(t, diff::roialign(t, t.constant(xv), box, p), reduce));
  };
  diff::Tape tape;
  const diff::Var xi = tape.input(x);
  tape.backward(diff::weighted_sum(tape, diff::roialign(tape, xi, box, p), reduce));
  return diff::check_gradient(loss, x, tape.grad(xi));
}

inline diff::GradCheckResult check_mse(std::mt19937_64& rng) {
  const int h = uniform_int(rng, 1, 6), w = uniform_int(rng, 1, 6), c = uniform_int(rng, 1, 3);
  const Grid64 a = random_grid64(rng, h, w, c);
  const Grid64 b = random_grid64(rng, h, w, c);
  auto loss = [&](const Grid64& av, const Grid64& bv) {
    diff::Tape t;
    return t.scalar(diff::mse(t, t.constant(av), t.constant(bv)));
  };
  diff::Tape tape;
  const diff::Var ai = tape.input(a);
  const diff::Var bi = tape.input(b);
  tape.backward(diff::mse(tape, ai, bi));
  return merge({diff::check_gradient([&](const Grid64& v) { return loss(v, b); }, a, tape.grad(ai)),
                diff::check_gradient([&](const Grid64& v) { return loss(a, v); }, b, tape.grad(bi))});
}

inline diff::GradCheckResult check_focal(std::mt19937_64& rng) {
  const int h = uniform_int(rng, 2, 6), w = uniform_int(rng, 2, 6), c = uniform_int(rng, 1, 3);
  const Grid64 pred = random_grid64(rng, h, w, c, 0.05, 0.95);
  Grid64 target = random_grid64(rng, h, w, c, 0.0, 0.95);
  const int positives = uniform_int(rng, 0, 3);
  for (int i = 0; i < positives; ++i) target.values()[rng() % target.size()] = 1.0;
  auto loss = [&](const Grid64& pv) {
    diff::Tape t;
    return t.scalar(diff::focal_det_loss(t, t.constant(pv), t.constant(target)));
  };
  diff::Tape tape;
  const diff::Var pi = tape.input(pred);
  tape.backward(diff::focal_det_loss(tape, pi, tape.constant(target)));
  return diff::check_gradient(loss, pred, tape.grad(pi));
}

}  // namespace support
