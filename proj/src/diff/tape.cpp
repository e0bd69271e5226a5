#include "pointpose/diff/tape.hpp"

#include <stdexcept>

#include "pointpose/diff/losses.hpp"

namespace pointpose::diff {

namespace {

Grid64 scalar_grid(double v) { return Grid64(1, 1, 1, v); }

void add_into(Grid64& dst, const Grid64& src) {
  auto d = dst.values();
  auto s = src.values();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] += s[i];
}

}  // namespace

Var Tape::push_leaf(Grid64 value, bool requires_grad) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  nodes_.push_back(std::move(n));
  return Var{nodes_.size() - 1};
}

Var Tape::constant(Grid64 value) { return push_leaf(std::move(value), false); }

Var Tape::parameter(Grid64 value) {
  Var v = push_leaf(std::move(value), true);
  params_.push_back(v);
  return v;
}

Var Tape::input(Grid64 value) { return push_leaf(std::move(value), true); }

Var Tape::record(Grid64 value, std::span<const Var> inputs, Backward backward) {
  Node n;
  n.value = std::move(value);
  for (Var in : inputs) {
    if (in.id >= nodes_.size()) throw std::out_of_range("Tape::record: unknown input");
    n.inputs.push_back(in.id);
    n.requires_grad = n.requires_grad || nodes_[in.id].requires_grad;
  }
  n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var{nodes_.size() - 1};
}

double Tape::scalar(Var v) const {
  const Grid64& g = value(v);
  if (g.size() != 1) throw std::invalid_argument("Tape::scalar: value is not 1x1x1");
  return g.values()[0];
}

Grid64 Tape::grad(Var v) const {
  const Node& n = nodes_.at(v.id);
  if (n.grad) return *n.grad;
  return Grid64(n.value.height(), n.value.width(), n.value.channels());
}

void Tape::accumulate(Var v, const Grid64& g) {
  Node& n = nodes_.at(v.id);
  if (!n.requires_grad) return;
  if (!g.same_shape(n.value)) throw std::logic_error("Tape::accumulate: gradient shape mismatch");
  if (!n.grad) {
    n.grad = g;
  } else {
    add_into(*n.grad, g);
  }
}

void Tape::backward(Var root) {
  if (value(root).size() != 1) throw std::invalid_argument("Tape::backward: root must be scalar");
  for (Node& n : nodes_) n.grad.reset();
  if (!nodes_[root.id].requires_grad) return;
  nodes_[root.id].grad = scalar_grid(1.0);
  for (std::size_t i = root.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.grad || !n.backward || !n.requires_grad) continue;
    n.backward(*this, i);
  }
}

ConvVars bind_parameters(Tape& tape, const ConvLayer& layer) {
  return {tape.parameter(layer.weight), tape.parameter(layer.bias), layer.kernel_size,
          layer.in_channels, layer.out_channels};
}

ConvVars bind_constants(Tape& tape, const ConvLayer& layer) {
  return {tape.constant(layer.weight), tape.constant(layer.bias), layer.kernel_size,
          layer.in_channels, layer.out_channels};
}

namespace {

ConvLayer materialize(const Tape& tape, const ConvVars& vars) {
  ConvLayer layer(vars.in_channels, vars.out_channels, vars.kernel_size);
  layer.weight = tape.value(vars.weight);
  layer.bias = tape.value(vars.bias);
  return layer;
}

}  // namespace

Var conv2d(Tape& tape, Var x, const ConvVars& vars) {
  Grid64 out = conv2d_forward(tape.value(x), materialize(tape, vars));
  return tape.record(std::move(out), {x, vars.weight, vars.bias},
                     [x, vars](Tape& t, std::size_t self) {
                       ConvGrads g = conv2d_backward(t.value(x), materialize(t, vars),
                                                     t.grad_buffer(self));
                       t.accumulate(x, g.input);
                       t.accumulate(vars.weight, g.weight);
                       t.accumulate(vars.bias, g.bias);
                     });
}

Var roialign(Tape& tape, Var x, const Box& box, const RoiAlignParams& p) {
  Grid64 out = roialign_forward(tape.value(x), box, p);
  return tape.record(std::move(out), {x}, [x, box, p](Tape& t, std::size_t self) {
    const Grid64& in = t.value(x);
    t.accumulate(x, roialign_backward(in.height(), in.width(), box, p, t.grad_buffer(self)));
  });
}

Var add(Tape& tape, Var a, Var b) {
  const Grid64& av = tape.value(a);
  const Grid64& bv = tape.value(b);
  if (!av.same_shape(bv)) throw std::invalid_argument("add: shape mismatch");
  Grid64 out = av;
  add_into(out, bv);
  return tape.record(std::move(out), {a, b}, [a, b](Tape& t, std::size_t self) {
    t.accumulate(a, t.grad_buffer(self));
    t.accumulate(b, t.grad_buffer(self));
  });
}

Var relu(Tape& tape, Var a) {
  Grid64 out = tape.value(a);
  for (double& v : out.values()) v = v > 0 ? v : 0.0;
  return tape.record(std::move(out), {a}, [a](Tape& t, std::size_t self) {
    Grid64 g = t.grad_buffer(self);
    auto in = t.value(a).values();
    auto gv = g.values();
    for (std::size_t i = 0; i < gv.size(); ++i)
      if (!(in[i] > 0)) gv[i] = 0;
    t.accumulate(a, g);
  });
}

Var scale(Tape& tape, Var a, double factor) {
  Grid64 out = tape.value(a);
  for (double& v : out.values()) v *= factor;
  return tape.record(std::move(out), {a}, [a, factor](Tape& t, std::size_t self) {
    Grid64 g = t.grad_buffer(self);
    for (double& v : g.values()) v *= factor;
    t.accumulate(a, g);
  });
}

Var linear_combination(Tape& tape, std::span<const Var> terms, std::span<const double> coeffs) {
  if (terms.empty() || terms.size() != coeffs.size()) {
    throw std::invalid_argument("linear_combination: need matching non-empty terms/coeffs");
  }
  const Grid64& first = tape.value(terms[0]);
  Grid64 out(first.height(), first.width(), first.channels());
  for (std::size_t i = 0; i < terms.size(); ++i) {
    const Grid64& v = tape.value(terms[i]);
    if (!v.same_shape(out)) throw std::invalid_argument("linear_combination: shape mismatch");
    auto o = out.values();
    auto s = v.values();
    for (std::size_t j = 0; j < o.size(); ++j) o[j] += coeffs[i] * s[j];
  }
  std::vector<Var> ts(terms.begin(), terms.end());
  std::vector<double> cs(coeffs.begin(), coeffs.end());
  return tape.record(std::move(out), std::span<const Var>(ts), [ts, cs](Tape& t, std::size_t self) {
    for (std::size_t i = 0; i < ts.size(); ++i) {
      Grid64 g = t.grad_buffer(self);
      for (double& v : g.values()) v *= cs[i];
      t.accumulate(ts[i], g);
    }
  });
}

Var weighted_sum(Tape& tape, Var a, const Grid64& weights) {
  const Grid64& av = tape.value(a);
  if (!av.same_shape(weights)) throw std::invalid_argument("weighted_sum: shape mismatch");
  double s = 0;
  auto x = av.values();
  auto w = weights.values();
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * w[i];
  return tape.record(scalar_grid(s), {a}, [a, weights](Tape& t, std::size_t self) {
    Grid64 g = weights;
    const double up = t.grad_buffer(self).values()[0];
    for (double& v : g.values()) v *= up;
    t.accumulate(a, g);
  });
}

Var mse(Tape& tape, Var a, Var b) {
  const double loss = mse(tape.value(a), tape.value(b));
  return tape.record(scalar_grid(loss), {a, b}, [a, b](Tape& t, std::size_t self) {
    const double up = t.grad_buffer(self).values()[0];
    Grid64 g = mse_grad(t.value(a), t.value(b));
    for (double& v : g.values()) v *= up;
    t.accumulate(a, g);
    for (double& v : g.values()) v = -v;
    t.accumulate(b, g);
  });
}

Var focal_det_loss(Tape& tape, Var pred, Var target) {
  const double loss = focal_det_loss(tape.value(pred), tape.value(target));
  if (tape.requires_grad(target)) {
    throw std::invalid_argument("focal_det_loss: target must be a constant");
  }
  return tape.record(scalar_grid(loss), {pred, target}, [pred, target](Tape& t, std::size_t self) {
    const double up = t.grad_buffer(self).values()[0];
    Grid64 g = focal_det_loss_grad(t.value(pred), t.value(target));
    for (double& v : g.values()) v *= up;
    t.accumulate(pred, g);
  });
}

}  // namespace pointpose::diff
