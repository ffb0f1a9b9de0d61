#include "crackinspect/mask.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <string>

#include "crackinspect/error.hpp"

namespace crackinspect {

Polygon::Polygon(std::vector<Point> vertices) : vertices_(std::move(vertices)) {
  if (vertices_.size() < 3) {
    throw Error(ErrorCode::InvalidPolygon,
                "polygon needs at least 3 vertices, got " + std::to_string(vertices_.size()));
  }
  for (const auto& p : vertices_) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || p.x < 0.0 || p.y < 0.0) {
      throw Error(ErrorCode::InvalidPolygon,
                  "polygon vertex (" + std::to_string(p.x) + ", " + std::to_string(p.y) +
                      ") is not a finite non-negative coordinate");
    }
  }
}

BinaryMask::BinaryMask(int width, int height)
    : width_(width), height_(height), words_per_row_((width + 63) / 64) {
  if (width <= 0 || height <= 0) {
    throw Error(ErrorCode::InvalidArgument, "mask dimensions must be positive, got " +
                                                std::to_string(width) + "x" +
                                                std::to_string(height));
  }
  words_.assign(static_cast<std::size_t>(words_per_row_) * static_cast<std::size_t>(height), 0);
}

std::size_t BinaryMask::count() const noexcept {
  std::size_t n = 0;
  for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
  return n;
}

bool BinaryMask::empty() const noexcept {
  return std::all_of(words_.begin(), words_.end(), [](std::uint64_t w) { return w == 0; });
}

BinaryMask rasterize(const Polygon& polygon, int width, int height) {
  BinaryMask mask(width, height);
  const auto& v = polygon.vertices();
  const std::size_t n = v.size();
  std::vector<double> crossings;
  crossings.reserve(n);

  for (int row = 0; row < height; ++row) {
    const double yc = row + 0.5;
    crossings.clear();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
      const Point& a = v[j];
      const Point& b = v[i];
      // Half-open in y: an edge spans the scanline when min <= yc < max, which
      // puts centers on a top edge inside and on a bottom edge outside.
      if ((a.y <= yc) != (b.y <= yc)) {
        crossings.push_back(a.x + (yc - a.y) * (b.x - a.x) / (b.y - a.y));
      }
    }
    std::sort(crossings.begin(), crossings.end());
    for (std::size_t k = 0; k + 1 < crossings.size(); k += 2) {
      // Span [left, right): centers on the left edge are in, on the right out.
      const double first = std::ceil(crossings[k] - 0.5);
      const double last = std::ceil(crossings[k + 1] - 0.5) - 1.0;
      const int x0 = static_cast<int>(std::max(first, 0.0));
      const int x1 = static_cast<int>(std::min(last, static_cast<double>(width - 1)));
      for (int x = x0; x <= x1; ++x) mask.set(x, row);
    }
  }
  return mask;
}

namespace {

void require_same_shape(const BinaryMask& a, const BinaryMask& b) {
  if (!a.same_shape(b)) {
    throw Error(ErrorCode::DimensionMismatch,
                "mask dimensions differ: " + std::to_string(a.width()) + "x" +
                    std::to_string(a.height()) + " vs " + std::to_string(b.width()) + "x" +
                    std::to_string(b.height()));
  }
}

}  // namespace

BinaryMask mask_union(std::span<const BinaryMask> masks) {
  if (masks.empty()) throw Error(ErrorCode::InvalidArgument, "union of an empty mask list");
  BinaryMask out = masks.front();
  for (const auto& m : masks.subspan(1)) {
    require_same_shape(out, m);
    auto dst = out.words();
    auto src = m.words();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] |= src[i];
  }
  return out;
}

BinaryMask mask_intersection(const BinaryMask& a, const BinaryMask& b) {
  require_same_shape(a, b);
  BinaryMask out = a;
  auto dst = out.words();
  auto src = b.words();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] &= src[i];
  return out;
}

namespace {

struct DisjointSet {
  std::vector<std::int32_t> parent;

  std::int32_t make() {
    parent.push_back(static_cast<std::int32_t>(parent.size()));
    return parent.back();
  }
  std::int32_t find(std::int32_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(std::int32_t a, std::int32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    // Keep the smaller provisional label as root; provisional labels are
    // allocated in raster order.
    if (b < a) std::swap(a, b);
    parent[b] = a;
  }
};

}  // namespace

LabeledComponents connected_components(const BinaryMask& mask) {
  const int w = mask.width();
  const int h = mask.height();
  LabeledComponents out;
  out.width = w;
  out.height = h;
  out.labels.assign(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), 0);

  DisjointSet sets;
  sets.make();  // slot 0 is background
  auto idx = [w](int x, int y) {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x);
  };

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!mask.get(x, y)) continue;
      std::int32_t label = 0;
      // Already-visited 8-neighbors: W, NW, N, NE.
      const int nx[4] = {x - 1, x - 1, x, x + 1};
      const int ny[4] = {y, y - 1, y - 1, y - 1};
      for (int k = 0; k < 4; ++k) {
        if (nx[k] < 0 || ny[k] < 0 || nx[k] >= w) continue;
        const std::int32_t l = out.labels[idx(nx[k], ny[k])];
        if (l == 0) continue;
        if (label == 0) {
          label = l;
        } else if (l != label) {
          sets.unite(label, l);
        }
      }
      out.labels[idx(x, y)] = label == 0 ? sets.make() : label;
    }
  }

  // Roots are the minimum provisional label of each set, so numbering roots
  // in increasing order reproduces raster order of first pixels.
  std::vector<std::int32_t> final_label(sets.parent.size(), 0);
  for (std::size_t l = 1; l < sets.parent.size(); ++l) {
    const auto root = sets.find(static_cast<std::int32_t>(l));
    if (root == static_cast<std::int32_t>(l)) final_label[l] = ++out.count;
  }
  for (auto& l : out.labels) {
    if (l != 0) l = final_label[sets.find(l)];
  }
  return out;
}

BinaryMask component_mask(const LabeledComponents& components, int label) {
  BinaryMask out(components.width, components.height);
  for (int y = 0; y < components.height; ++y) {
    for (int x = 0; x < components.width; ++x) {
      if (components.label_at(x, y) == label) out.set(x, y);
    }
  }
  return out;
}

IouValue iou(const BinaryMask& a, const BinaryMask& b) {
  require_same_shape(a, b);
  std::size_t inter = 0;
  std::size_t uni = 0;
  auto wa = a.words();
  auto wb = b.words();
  for (std::size_t i = 0; i < wa.size(); ++i) {
    inter += static_cast<std::size_t>(std::popcount(wa[i] & wb[i]));
    uni += static_cast<std::size_t>(std::popcount(wa[i] | wb[i]));
  }
  if (uni == 0) return std::nullopt;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace crackinspect
