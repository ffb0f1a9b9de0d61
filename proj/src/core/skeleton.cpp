#include "crackinspect/skeleton.hpp"

#include <cmath>
#include <string>

#include "crackinspect/error.hpp"

namespace crackinspect {

StructuringElement::StructuringElement(const std::array<Cell, 9>& cells) : cells_(cells) {
  for (unsigned k = 0; k < 9; ++k) {
    if (cells_[k] == Cell::Foreground) foreground_bits_ |= 1U << k;
    if (cells_[k] == Cell::Background) background_bits_ |= 1U << k;
  }
  if (foreground_bits_ == 0) {
    throw Error(ErrorCode::InvalidArgument,
                "structuring element needs at least one foreground cell");
  }
}

StructuringElement StructuringElement::parse(std::string_view pattern) {
  std::array<Cell, 9> cells{};
  std::size_t k = 0;
  for (char c : pattern) {
    if (c == ' ' || c == '/' || c == '\n') continue;
    if (k == 9) break;
    switch (c) {
      case '1': cells[k++] = Cell::Foreground; break;
      case '0': cells[k++] = Cell::Background; break;
      case 'x':
      case 'X':
      case '.': cells[k++] = Cell::DontCare; break;
      default:
        throw Error(ErrorCode::InvalidArgument,
                    std::string("bad structuring element character '") + c + "'");
    }
  }
  if (k != 9) {
    throw Error(ErrorCode::InvalidArgument, "structuring element pattern needs 9 cells");
  }
  return StructuringElement(cells);
}

StructuringElement StructuringElement::rotated() const {
  // Clockwise: new(col, row) = old(row, 2 - col).
  std::array<Cell, 9> out{};
  for (int row = 0; row < 3; ++row) {
    for (int col = 0; col < 3; ++col) out[row * 3 + col] = cells_[(2 - col) * 3 + row];
  }
  return StructuringElement(out);
}

std::span<const StructuringElement, 8> golay_l_elements() {
  static const std::array<StructuringElement, 8> elements = [] {
    auto edge = StructuringElement::parse("000 x1x 111");
    auto corner = StructuringElement::parse("x00 110 x1x");
    std::array<StructuringElement, 8> out{edge, corner, edge, corner,
                                          edge, corner, edge, corner};
    for (int r = 1; r < 4; ++r) {
      out[2 * r] = out[2 * r - 2].rotated();
      out[2 * r + 1] = out[2 * r - 1].rotated();
    }
    return out;
  }();
  return std::span<const StructuringElement, 8>(elements);
}

namespace {

/// Byte grid with a one-pixel black border so every 3x3 read is in range.
class PaddedGrid {
 public:
  explicit PaddedGrid(const BinaryMask& mask)
      : width_(mask.width()), height_(mask.height()), stride_(mask.width() + 2),
        cells_(static_cast<std::size_t>(stride_) * static_cast<std::size_t>(height_ + 2), 0) {
    for (int y = 0; y < height_; ++y) {
      for (int x = 0; x < width_; ++x) cells_[index(x, y)] = mask.get(x, y) ? 1 : 0;
    }
  }

  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y + 1) * static_cast<std::size_t>(stride_) +
           static_cast<std::size_t>(x + 1);
  }

  unsigned code(std::size_t i) const noexcept {
    const std::size_t up = i - static_cast<std::size_t>(stride_);
    const std::size_t down = i + static_cast<std::size_t>(stride_);
    return unsigned(cells_[up - 1]) | unsigned(cells_[up]) << 1 | unsigned(cells_[up + 1]) << 2 |
           unsigned(cells_[i - 1]) << 3 | unsigned(cells_[i]) << 4 |
           unsigned(cells_[i + 1]) << 5 | unsigned(cells_[down - 1]) << 6 |
           unsigned(cells_[down]) << 7 | unsigned(cells_[down + 1]) << 8;
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::uint8_t& operator[](std::size_t i) noexcept { return cells_[i]; }
  std::uint8_t operator[](std::size_t i) const noexcept { return cells_[i]; }

  BinaryMask to_mask() const {
    BinaryMask out(width_, height_);
    for (int y = 0; y < height_; ++y) {
      for (int x = 0; x < width_; ++x) {
        if (cells_[index(x, y)]) out.set(x, y);
      }
    }
    return out;
  }

 private:
  int width_;
  int height_;
  int stride_;
  std::vector<std::uint8_t> cells_;
};

/// One synchronous thinning sweep. Returns the number of removed pixels.
std::size_t sweep(PaddedGrid& grid, const std::array<bool, 512>& table,
                  std::vector<std::size_t>& scratch) {
  scratch.clear();
  for (int y = 0; y < grid.height(); ++y) {
    std::size_t i = grid.index(0, y);
    for (int x = 0; x < grid.width(); ++x, ++i) {
      if (grid[i] && table[grid.code(i)]) scratch.push_back(i);
    }
  }
  for (auto i : scratch) grid[i] = 0;
  return scratch.size();
}

std::array<bool, 512> match_table(const StructuringElement& element) {
  std::array<bool, 512> table{};
  for (unsigned code = 0; code < 512; ++code) table[code] = element.matches(code);
  return table;
}

// Removing a pixel keeps 8-connected topology when the Yokoi connectivity
// number of its neighborhood is 1.
std::array<bool, 512> simple_table() {
  std::array<bool, 512> table{};
  static constexpr std::array<int, 8> ring = {5, 2, 1, 0, 3, 6, 7, 8};  // E NE N NW W SW S SE
  for (unsigned code = 0; code < 512; ++code) {
    if (!(code & 16U)) continue;
    auto bg = [&](int k) { return (code >> ring[static_cast<std::size_t>(k % 8)] & 1U) ? 0 : 1; };
    int n = 0;
    for (int k = 0; k < 8; k += 2) n += bg(k) - bg(k) * bg(k + 1) * bg(k + 2);
    table[code] = n == 1;
  }
  return table;
}

/// Sequentially deletes simple pixels that complete a 2x2 white block.
std::size_t break_blocks(PaddedGrid& grid, const std::array<bool, 512>& simple) {
  std::size_t removed = 0;
  for (int y = 0; y < grid.height(); ++y) {
    std::size_t i = grid.index(0, y);
    for (int x = 0; x < grid.width(); ++x, ++i) {
      if (!grid[i]) continue;
      const unsigned c = grid.code(i);
      const bool in_block = (c & 0x1B) == 0x1B || (c & 0x36) == 0x36 || (c & 0xD8) == 0xD8 ||
                            (c & 0x1B0) == 0x1B0;
      if (in_block && simple[c]) {
        grid[i] = 0;
        ++removed;
      }
    }
  }
  return removed;
}

}  // namespace

BinaryMask hit_or_miss(const BinaryMask& mask, const StructuringElement& element) {
  const PaddedGrid grid(mask);
  BinaryMask out(mask.width(), mask.height());
  // With a background center the template can fire on black pixels too, so
  // every pixel is evaluated.
  for (int y = 0; y < mask.height(); ++y) {
    std::size_t i = grid.index(0, y);
    for (int x = 0; x < mask.width(); ++x, ++i) {
      if (element.matches(grid.code(i))) out.set(x, y);
    }
  }
  return out;
}

BinaryMask thin_step(const BinaryMask& mask, const StructuringElement& element) {
  const BinaryMask hits = hit_or_miss(mask, element);
  BinaryMask out = mask;
  auto dst = out.words();
  auto src = hits.words();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] &= ~src[i];
  return out;
}

SkeletonResult thin_to_skeleton(const BinaryMask& mask) {
  static const std::array<std::array<bool, 512>, 8> tables = [] {
    std::array<std::array<bool, 512>, 8> out{};
    const auto elements = golay_l_elements();
    for (std::size_t k = 0; k < elements.size(); ++k) out[k] = match_table(elements[k]);
    return out;
  }();
  static const std::array<bool, 512> simple = simple_table();

  PaddedGrid grid(mask);
  std::vector<std::size_t> scratch;
  const long long cap = static_cast<long long>(mask.width()) * mask.height();
  int passes = 0;
  for (;;) {
    if (passes >= cap) {
      throw Error(ErrorCode::Internal, "thinning did not converge within the pass cap");
    }
    ++passes;
    std::size_t removed = 0;
    for (const auto& table : tables) removed += sweep(grid, table, scratch);
    if (removed == 0 && break_blocks(grid, simple) == 0) break;
  }

  SkeletonResult result{grid.to_mask(), 0, {}, passes};
  const auto components = connected_components(result.skeleton);
  result.per_component_lengths.resize(static_cast<std::size_t>(components.count));
  for (int k = 0; k < components.count; ++k) result.per_component_lengths[k].component = k + 1;
  for (auto l : components.labels) {
    if (l != 0) ++result.per_component_lengths[static_cast<std::size_t>(l - 1)].length;
  }
  result.total_length = result.skeleton.count();
  return result;
}

bool is_width_one(const BinaryMask& mask) {
  for (int y = 0; y + 1 < mask.height(); ++y) {
    for (int x = 0; x + 1 < mask.width(); ++x) {
      if (mask.get(x, y) && mask.get(x + 1, y) && mask.get(x, y + 1) && mask.get(x + 1, y + 1)) {
        return false;
      }
    }
  }
  return true;
}

SkeletonLengths skeleton_lengths(const BinaryMask& skeleton) {
  if (!is_width_one(skeleton)) {
    throw Error(ErrorCode::WidthViolation,
                "skeleton contains a 2x2 white block; thin the mask first");
  }
  const auto components = connected_components(skeleton);
  SkeletonLengths out;
  out.per_component.resize(static_cast<std::size_t>(components.count));
  for (int k = 0; k < components.count; ++k) out.per_component[k].component = k + 1;
  for (auto l : components.labels) {
    if (l != 0) ++out.per_component[static_cast<std::size_t>(l - 1)].length;
  }
  out.total = skeleton.count();
  return out;
}

double diagonal_weighted_length(const BinaryMask& skeleton) {
  double length = 0.0;
  const double diagonal = std::sqrt(2.0);
  for (int y = 0; y < skeleton.height(); ++y) {
    for (int x = 0; x < skeleton.width(); ++x) {
      if (!skeleton.get(x, y)) continue;
      if (skeleton.at(x + 1, y)) length += 1.0;
      if (skeleton.at(x, y + 1)) length += 1.0;
      // Diagonal links only count when no orthogonal pixel already joins the
      // two ends.
      if (skeleton.at(x + 1, y + 1) && !skeleton.at(x + 1, y) && !skeleton.at(x, y + 1)) {
        length += diagonal;
      }
      if (skeleton.at(x - 1, y + 1) && !skeleton.at(x - 1, y) && !skeleton.at(x, y + 1)) {
        length += diagonal;
      }
    }
  }
  return length;
}

}  // namespace crackinspect
