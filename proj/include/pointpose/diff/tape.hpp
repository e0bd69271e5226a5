#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <optional>
#include <span>
#include <vector>

#include "pointpose/diff/layers.hpp"
#include "pointpose/grid.hpp"

namespace pointpose::diff {

/// Handle to a value recorded on a Tape.
struct Var {
  std::size_t id = 0;
};

/// Reverse-mode tape over Grid64 values.
///
/// Operations are recorded in forward order together with a closure that
/// pushes the node's gradient to its inputs. backward() walks the records in
/// exact reverse order; gradients accumulate additively. A tape is single-use
/// and not thread-safe; independent tapes may run concurrently.
class Tape {
 public:
  using Backward = std::function<void(Tape&, std::size_t)>;

  /// A value that never receives a gradient (targets, teacher maps, ...).
  Var constant(Grid64 value);
  /// A leaf that receives a gradient and is listed in parameters().
  Var parameter(Grid64 value);
  /// A leaf that receives a gradient but is not a parameter (FD checks on inputs).
  Var input(Grid64 value);

  /// Records an op result. `backward` is only invoked if some input requires a gradient.
  Var record(Grid64 value, std::span<const Var> inputs, Backward backward);
  Var record(Grid64 value, std::initializer_list<Var> inputs, Backward backward) {
    return record(std::move(value), std::span<const Var>(inputs.begin(), inputs.size()),
                  std::move(backward));
  }

  const Grid64& value(Var v) const { return nodes_.at(v.id).value; }
  double scalar(Var v) const;
  bool requires_grad(Var v) const { return nodes_.at(v.id).requires_grad; }

  /// Gradient of the last backward() root w.r.t. v (zeros if v did not contribute).
  Grid64 grad(Var v) const;
  /// Adds g into v's gradient buffer; used by op backward closures.
  void accumulate(Var v, const Grid64& g);
  const Grid64& grad_buffer(std::size_t id) const { return *nodes_.at(id).grad; }

  /// Seeds d root / d root = 1; root must be a 1x1x1 scalar.
  void backward(Var root);

  std::span<const Var> parameters() const { return params_; }
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Grid64 value;
    std::optional<Grid64> grad;
    std::vector<std::size_t> inputs;
    Backward backward;
    bool requires_grad = false;
  };

  Var push_leaf(Grid64 value, bool requires_grad);

  std::vector<Node> nodes_;
  std::vector<Var> params_;
};

/// Parameters of a ConvLayer bound onto a tape.
struct ConvVars {
  Var weight;
  Var bias;
  int kernel_size = 3;
  int in_channels = 1;
  int out_channels = 1;
};

ConvVars bind_parameters(Tape& tape, const ConvLayer& layer);
/// Binds the layer as constants (no gradient), e.g. a frozen module.
ConvVars bind_constants(Tape& tape, const ConvLayer& layer);

Var conv2d(Tape& tape, Var x, const ConvVars& layer);
Var roialign(Tape& tape, Var x, const Box& box, const RoiAlignParams& p);
Var add(Tape& tape, Var a, Var b);
Var relu(Tape& tape, Var a);
Var scale(Tape& tape, Var a, double factor);
/// sum_i coeffs[i] * terms[i]; all terms share one shape.
Var linear_combination(Tape& tape, std::span<const Var> terms, std::span<const double> coeffs);
/// sum(a * weights) as a scalar; weights are constants.
Var weighted_sum(Tape& tape, Var a, const Grid64& weights);
Var mse(Tape& tape, Var a, Var b);
Var focal_det_loss(Tape& tape, Var pred, Var target);

}  // namespace pointpose::diff
