#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pointpose {

/// Dense H x W x C field, row-major and channel-last.
///
/// Heatmaps, ROI crops and convolution weights all live in this type. The
/// float instantiation is the storage/inference type; the double one is used
/// by the differentiable kernels.
template <typename T>
class BasicGrid {
 public:
  using value_type = T;

  BasicGrid() : BasicGrid(1, 1, 1) {}

  BasicGrid(int height, int width, int channels, T fill = T{0})
      : height_(height), width_(width), channels_(channels) {
    if (height < 1 || width < 1 || channels < 1) {
      throw std::invalid_argument("grid dimensions must be >= 1, got " +
                                  std::to_string(height) + "x" + std::to_string(width) +
                                  "x" + std::to_string(channels));
    }
    data_.assign(static_cast<std::size_t>(height) * width * channels, fill);
  }

  BasicGrid(int height, int width, int channels, std::vector<T> data)
      : height_(height), width_(width), channels_(channels), data_(std::move(data)) {
    if (height < 1 || width < 1 || channels < 1) {
      throw std::invalid_argument("grid dimensions must be >= 1, got " +
                                  std::to_string(height) + "x" + std::to_string(width) +
                                  "x" + std::to_string(channels));
    }
    if (data_.size() != static_cast<std::size_t>(height) * width * channels) {
      throw std::invalid_argument("grid data length does not match dimensions");
    }
  }

  template <typename U>
  static BasicGrid cast_from(const BasicGrid<U>& other) {
    BasicGrid out(other.height(), other.width(), other.channels());
    auto src = other.values();
    for (std::size_t i = 0; i < src.size(); ++i) out.data_[i] = static_cast<T>(src[i]);
    return out;
  }

  int height() const { return height_; }
  int width() const { return width_; }
  int channels() const { return channels_; }
  std::size_t size() const { return data_.size(); }
  std::size_t plane_size() const { return static_cast<std::size_t>(height_) * width_; }

  std::size_t index(int y, int x, int c) const {
    return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
  }

  T& at(int y, int x, int c = 0) { return data_[index(y, x, c)]; }
  const T& at(int y, int x, int c = 0) const { return data_[index(y, x, c)]; }

  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }

  bool same_shape(const BasicGrid& o) const {
    return height_ == o.height_ && width_ == o.width_ && channels_ == o.channels_;
  }

  /// Copies one channel into a new single-channel grid.
  BasicGrid channel(int c) const {
    check_channel(c);
    BasicGrid out(height_, width_, 1);
    for (int y = 0; y < height_; ++y)
      for (int x = 0; x < width_; ++x) out.at(y, x) = at(y, x, c);
    return out;
  }

  void check_channel(int c) const {
    if (c < 0 || c >= channels_) {
      throw std::out_of_range("channel " + std::to_string(c) + " out of range [0," +
                              std::to_string(channels_) + ")");
    }
  }

  friend bool operator==(const BasicGrid& a, const BasicGrid& b) {
    return a.same_shape(b) && a.data_ == b.data_;
  }

 private:
  int height_;
  int width_;
  int channels_;
  std::vector<T> data_;
};

using Grid = BasicGrid<float>;
using Grid64 = BasicGrid<double>;

std::string shape_string(int h, int w, int c);

template <typename T>
std::string shape_string(const BasicGrid<T>& g) {
  return shape_string(g.height(), g.width(), g.channels());
}

/// A detected point in heatmap-cell index coordinates: cell (i, j) is at
/// (x = j, y = i).
struct Point {
  double x = 0;
  double y = 0;
  double score = 0;
  int channel = 0;

  friend bool operator==(const Point&, const Point&) = default;
};

/// Axis-aligned box; x1 < x2 and y1 < y2.
struct Box {
  double x1 = 0;
  double y1 = 0;
  double x2 = 0;
  double y2 = 0;
  double score = 0;

  double width() const { return x2 - x1; }
  double height() const { return y2 - y1; }
  double area() const { return width() > 0 && height() > 0 ? width() * height() : 0.0; }
  double center_x() const { return 0.5 * (x1 + x2); }
  double center_y() const { return 0.5 * (y1 + y2); }
  bool contains(double x, double y) const { return x >= x1 && x <= x2 && y >= y1 && y <= y2; }
  Box scaled(double factor) const {
    return {x1 * factor, y1 * factor, x2 * factor, y2 * factor, score};
  }

  friend bool operator==(const Box&, const Box&) = default;
};

double iou(const Box& a, const Box& b);

/// Writes max(existing, exp(-d^2 / (2 sigma^2))) into one channel.
///
/// (cx, cy) are index coordinates and must lie within the grid's cell extents,
/// i.e. -0.5 <= cx < width - 0.5. `amplitude` scales the bump before the max.
void render_gaussian(Grid& grid, int channel, double cx, double cy, double sigma,
                     double amplitude = 1.0);

/// Per-channel bilinear resize. Cell (i, j) has continuous center
/// (j + 0.5, i + 0.5); sample positions are clamped to the edge cells.
Grid bilinear_resize(const Grid& g, int out_h, int out_w);

/// Max over channels; used to turn a K-channel heatmap stack into one image.
Grid collapse_channels(const Grid& g);

/// Clamps every value into [lo, hi].
void clamp_values(Grid& g, float lo, float hi);

}  // namespace pointpose
