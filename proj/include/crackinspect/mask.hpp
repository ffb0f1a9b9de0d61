#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace crackinspect {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

/// Closed polygon in image coordinates (x right, y down). The constructor
/// enforces at least three vertices with finite, non-negative coordinates.
class Polygon {
 public:
  explicit Polygon(std::vector<Point> vertices);

  const std::vector<Point>& vertices() const noexcept { return vertices_; }
  std::size_t size() const noexcept { return vertices_.size(); }

  friend bool operator==(const Polygon&, const Polygon&) = default;

 private:
  std::vector<Point> vertices_;
};

/// Dense bit-packed binary image, row-major, one 64-bit word run per row.
/// White (true) marks crack pixels.
class BinaryMask {
 public:
  BinaryMask() = default;
  BinaryMask(int width, int height);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }

  bool get(int x, int y) const noexcept {
    return (words_[word_index(x, y)] >> (x & 63)) & 1U;
  }
  void set(int x, int y, bool white = true) noexcept {
    const std::uint64_t bit = std::uint64_t{1} << (x & 63);
    auto& w = words_[word_index(x, y)];
    w = white ? (w | bit) : (w & ~bit);
  }
  bool contains(int x, int y) const noexcept {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }
  /// Out-of-image reads are black.
  bool at(int x, int y) const noexcept { return contains(x, y) && get(x, y); }

  std::size_t count() const noexcept;
  bool empty() const noexcept;
  bool same_shape(const BinaryMask& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_;
  }

  int words_per_row() const noexcept { return words_per_row_; }
  std::span<const std::uint64_t> words() const noexcept { return words_; }
  std::span<std::uint64_t> words() noexcept { return words_; }

  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

 private:
  std::size_t word_index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(words_per_row_) +
           static_cast<std::size_t>(x >> 6);
  }

  int width_ = 0;
  int height_ = 0;
  int words_per_row_ = 0;
  std::vector<std::uint64_t> words_;
};

struct LabeledComponents {
  int width = 0;
  int height = 0;
  std::vector<std::int32_t> labels;  // 0 = background
  int count = 0;

  std::int32_t label_at(int x, int y) const {
    return labels[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
                  static_cast<std::size_t>(x)];
  }
};

/// Ratio in [0,1], or std::nullopt when both masks are all black.
using IouValue = std::optional<double>;

/// A pixel is white iff its center lies inside the polygon under the even-odd
/// rule. Centers exactly on a left or top edge are inside.
BinaryMask rasterize(const Polygon& polygon, int width, int height);

BinaryMask mask_union(std::span<const BinaryMask> masks);
BinaryMask mask_intersection(const BinaryMask& a, const BinaryMask& b);

/// 8-connected labeling; labels are numbered in raster order of each
/// component's first pixel.
LabeledComponents connected_components(const BinaryMask& mask);

/// Extracts component `label` (1-based) as its own full-size mask.
BinaryMask component_mask(const LabeledComponents& components, int label);

IouValue iou(const BinaryMask& a, const BinaryMask& b);

}  // namespace crackinspect
