#pragma once

#include "pointpose/grid.hpp"

namespace pointpose::diff {

/// Clamp bound for focal-loss predictions: p is evaluated in [eps, 1 - eps].
inline constexpr double kFocalEps = 1e-6;

/// mean((a - b)^2) over every element.
double mse(const Grid64& a, const Grid64& b);
/// d mse / d a = 2 (a - b) / n.
Grid64 mse_grad(const Grid64& a, const Grid64& b);

/// Penalty-reduced focal loss with exponents (2, 4):
///   L = -1/max(1, P) * sum( y == 1 ? (1-p)^2 log p : (1-y)^4 p^2 log(1-p) )
/// where P counts cells with y == 1 and p is clamped to [eps, 1 - eps].
double focal_det_loss(const Grid64& pred, const Grid64& target);
/// Gradient w.r.t. pred; zero where the clamp is active.
Grid64 focal_det_loss_grad(const Grid64& pred, const Grid64& target);

}  // namespace pointpose::diff
