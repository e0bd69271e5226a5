#pragma once

#include <cstddef>
#include <vector>

#include "pointpose/grid.hpp"

namespace pointpose {

enum class PoolKind { Center, CascadeTopLeft, CascadeBottomRight };

/// out(y, x) = max_k g(y, k) + max_m g(m, x), per channel. O(H*W) per channel.
Grid center_pool(const Grid& g);

/// Cascade corner pooling, per channel. For CascadeTopLeft:
///   k* = argmax_{k >= x} g(y, k)              (ties -> smallest k)
///   h  = g(y, k*) + max_{m >= y} g(m, k*)
///   m* = argmax_{m >= y} g(m, x)              (ties -> smallest m)
///   v  = g(m*, x) + max_{k >= x} g(m*, k)
///   out(y, x) = h + v
/// CascadeBottomRight scans k <= x, m <= y with ties going to the largest
/// index. Throws std::invalid_argument for PoolKind::Center.
Grid cascade_corner_pool(const Grid& g, PoolKind kind);

/// Every cell with value >= threshold that equals the max of its (edge-clamped)
/// 3x3 neighbourhood. Plateau cells all qualify. Points come out ordered by
/// (channel, y, x).
std::vector<Point> local_peaks(const Grid& g, double threshold);

/// Every cell with value >= threshold, without neighbourhood suppression.
std::vector<Point> threshold_points(const Grid& g, double threshold);

/// The n highest-score points, score descending; ties by (y, x, channel).
std::vector<Point> top_n_points(std::vector<Point> points, std::size_t n);

/// Strict weak order used by top_n_points.
bool point_rank_less(const Point& a, const Point& b);

}  // namespace pointpose
