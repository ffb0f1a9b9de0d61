#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "crackinspect/mask.hpp"

namespace crackinspect {

enum class Cell : std::uint8_t { Background, Foreground, DontCare };

/// 3x3 hit-or-miss template, cells in row-major order (index 4 is the
/// center).
class StructuringElement {
 public:
  explicit StructuringElement(const std::array<Cell, 9>& cells);

  /// Parses a 9-character row-major pattern of '1' (foreground), '0'
  /// (background) and 'x' (don't care).
  static StructuringElement parse(std::string_view pattern);

  const std::array<Cell, 9>& cells() const noexcept { return cells_; }
  Cell at(int col, int row) const noexcept { return cells_[row * 3 + col]; }

  /// Rotated 90 degrees clockwise (in image coordinates, y down).
  StructuringElement rotated() const;

  /// True when a 3x3 neighborhood, encoded as a 9-bit row-major code (bit k
  /// set = cell k white), satisfies the template.
  bool matches(unsigned code) const noexcept {
    return (code & foreground_bits_) == foreground_bits_ && (code & background_bits_) == 0;
  }

  friend bool operator==(const StructuringElement& a, const StructuringElement& b) {
    return a.cells_ == b.cells_;
  }

 private:
  std::array<Cell, 9> cells_;
  unsigned foreground_bits_ = 0;
  unsigned background_bits_ = 0;
};

/// The eight Golay "L" thinning elements in the fixed application order:
/// both base patterns at 0, 90, 180 and 270 degrees, interleaved.
std::span<const StructuringElement, 8> golay_l_elements();

struct ComponentLength {
  int component = 0;       // 1-based id from connected_components
  std::size_t length = 0;  // px

  friend bool operator==(const ComponentLength&, const ComponentLength&) = default;
};

struct SkeletonLengths {
  std::size_t total = 0;
  std::vector<ComponentLength> per_component;
};

struct SkeletonResult {
  BinaryMask skeleton;
  std::size_t total_length = 0;
  std::vector<ComponentLength> per_component_lengths;
  int passes = 0;  // full 8-element passes, including the final no-change pass
};

BinaryMask hit_or_miss(const BinaryMask& mask, const StructuringElement& element);

/// mask minus hit_or_miss(mask, element); all matches are found against the
/// input and removed together.
BinaryMask thin_step(const BinaryMask& mask, const StructuringElement& element);

/// Thins until a full pass over the eight L elements changes nothing. Where
/// the L elements stall on a 2x2 white block (branch junctions), simple
/// pixels of the block are deleted in raster order and thinning resumes.
SkeletonResult thin_to_skeleton(const BinaryMask& mask);

/// Pixel counts, total and per 8-connected component. Throws WidthViolation
/// when the input contains a 2x2 white block.
SkeletonLengths skeleton_lengths(const BinaryMask& skeleton);

/// True when no 2x2 block is entirely white.
bool is_width_one(const BinaryMask& mask);

/// Alternative length that walks skeleton links: 1 per orthogonal step and
/// sqrt(2) per diagonal step not already bridged by an orthogonal pair. Not
/// used by the report, which counts pixels.
double diagonal_weighted_length(const BinaryMask& skeleton);

}  // namespace crackinspect
