#include <gtest/gtest.h>

#include <random>

#include "crackinspect/error.hpp"
#include "crackinspect/skeleton.hpp"
#include "support.hpp"

using namespace crackinspect;
using testsupport::from_rows;

namespace {

// Direct evaluation of the hit-or-miss definition, one neighborhood at a time.
BinaryMask hit_or_miss_oracle(const BinaryMask& m, const StructuringElement& e) {
  BinaryMask out(m.width(), m.height());
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) {
      bool hit = true;
      for (int r = 0; r < 3 && hit; ++r) {
        for (int c = 0; c < 3 && hit; ++c) {
          const bool white = m.at(x + c - 1, y + r - 1);
          const Cell cell = e.at(c, r);
          if (cell == Cell::Foreground && !white) hit = false;
          if (cell == Cell::Background && white) hit = false;
        }
      }
      if (hit) out.set(x, y);
    }
  }
  return out;
}

// Simple-point test by counting neighborhood components directly: one
// 8-connected white component among the 8 neighbors, and one 4-connected
// black component among the neighbors that touches p orthogonally.
bool simple_oracle(const BinaryMask& m, int px, int py) {
  auto count = [&](bool white, bool eight) {
    bool seen[3][3] = {};
    int n = 0;
    for (int sy = 0; sy < 3; ++sy) {
      for (int sx = 0; sx < 3; ++sx) {
        if ((sx == 1 && sy == 1) || seen[sy][sx]) continue;
        if (m.at(px + sx - 1, py + sy - 1) != white) continue;
        if (!white && sx != 1 && sy != 1) continue;  // black seeds must be 4-adjacent to p
        ++n;
        std::vector<std::pair<int, int>> stack{{sx, sy}};
        seen[sy][sx] = true;
        while (!stack.empty()) {
          const auto [cx, cy] = stack.back();
          stack.pop_back();
          for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
              if (!eight && dx != 0 && dy != 0) continue;
              const int nx = cx + dx;
              const int ny = cy + dy;
              if (nx < 0 || ny < 0 || nx > 2 || ny > 2 || (nx == 1 && ny == 1)) continue;
              if (seen[ny][nx] || m.at(px + nx - 1, py + ny - 1) != white) continue;
              seen[ny][nx] = true;
              stack.emplace_back(nx, ny);
            }
          }
        }
      }
    }
    return n;
  };
  return count(true, true) == 1 && count(false, false) == 1;
}

// Reference thinning built only from the direct hit-or-miss evaluation, with
// the same raster-order 2x2 block breaking once the L elements stall.
BinaryMask thin_oracle(BinaryMask m, bool break_blocks = true) {
  for (bool changed = true; changed;) {
    changed = false;
    for (const auto& e : golay_l_elements()) {
      const auto hits = hit_or_miss_oracle(m, e);
      if (hits.empty()) continue;
      for (int y = 0; y < m.height(); ++y) {
        for (int x = 0; x < m.width(); ++x) {
          if (hits.get(x, y)) m.set(x, y, false);
        }
      }
      changed = true;
    }
    if (changed || !break_blocks) continue;
    for (int y = 0; y < m.height(); ++y) {
      for (int x = 0; x < m.width(); ++x) {
        if (!m.get(x, y)) continue;
        bool in_block = false;
        for (int oy = -1; oy <= 0; ++oy) {
          for (int ox = -1; ox <= 0; ++ox) {
            in_block = in_block || (m.at(x + ox, y + oy) && m.at(x + ox + 1, y + oy) &&
                                    m.at(x + ox, y + oy + 1) && m.at(x + ox + 1, y + oy + 1));
          }
        }
        if (in_block && simple_oracle(m, x, y)) {
          m.set(x, y, false);
          changed = true;
        }
      }
    }
  }
  return m;
}

bool subset(const BinaryMask& a, const BinaryMask& b) {
  for (int y = 0; y < a.height(); ++y) {
    for (int x = 0; x < a.width(); ++x) {
      if (a.get(x, y) && !b.get(x, y)) return false;
    }
  }
  return true;
}

}  // namespace

TEST(StructuringElement, ParseAndInvariants) {
  const auto e = StructuringElement::parse("000 x1x 111");
  EXPECT_EQ(e.at(0, 0), Cell::Background);
  EXPECT_EQ(e.at(1, 1), Cell::Foreground);
  EXPECT_EQ(e.at(0, 1), Cell::DontCare);
  EXPECT_EQ(e.at(2, 2), Cell::Foreground);
  EXPECT_THROW(StructuringElement::parse("000 x1x 11"), Error);
  EXPECT_THROW(StructuringElement::parse("000 x2x 111"), Error);
  EXPECT_THROW(StructuringElement::parse("xxx x0x xxx"), Error);  // no foreground
  EXPECT_NO_THROW(StructuringElement::parse("xxx x1x xxx"));      // identity element
}

TEST(StructuringElement, RotationIsClockwiseAndCyclic) {
  const auto e = StructuringElement::parse("000 x1x 111");
  const auto r = e.rotated();
  // Top row of background moves to the right column.
  EXPECT_EQ(r, StructuringElement::parse("1x0 110 1x0"));
  EXPECT_EQ(r.rotated().rotated().rotated(), e);
}

TEST(StructuringElement, GolayOrderInterleavesBothBases) {
  const auto els = golay_l_elements();
  auto a = StructuringElement::parse("000 x1x 111");
  auto b = StructuringElement::parse("x00 110 x1x");
  for (int k = 0; k < 4; ++k) {
    EXPECT_EQ(els[2 * k], a) << k;
    EXPECT_EQ(els[2 * k + 1], b) << k;
    a = a.rotated();
    b = b.rotated();
  }
}

TEST(HitOrMiss, AllBlackStaysBlack) {
  for (const auto& e : golay_l_elements()) {
    EXPECT_TRUE(hit_or_miss(BinaryMask(9, 7), e).empty());
  }
}

TEST(HitOrMiss, IdentityElement) {
  std::mt19937 rng(4);
  const auto id = StructuringElement::parse("xxx x1x xxx");
  for (int t = 0; t < 20; ++t) {
    const auto m = testsupport::random_noise(rng, 70, 13, 0.4);
    EXPECT_EQ(hit_or_miss(m, id), m);
  }
}

TEST(HitOrMiss, IsolatedPoint) {
  const auto iso = StructuringElement::parse("000 010 000");
  const auto m = from_rows({".....", "..#..", ".....", "##..."});
  EXPECT_EQ(hit_or_miss(m, iso), from_rows({".....", "..#..", ".....", "....."}));
}

TEST(HitOrMiss, MatchesDirectEvaluation) {
  std::mt19937 rng(12);
  std::uniform_int_distribution<int> cell(0, 2);
  std::vector<StructuringElement> elements(golay_l_elements().begin(), golay_l_elements().end());
  while (elements.size() < 40) {
    std::array<Cell, 9> cells{};
    for (auto& c : cells) c = static_cast<Cell>(cell(rng));
    cells[4] = Cell::Foreground;
    elements.emplace_back(cells);
  }
  for (int t = 0; t < 30; ++t) {
    const auto m = testsupport::random_noise(rng, 67, 17, 0.55);
    for (const auto& e : elements) ASSERT_EQ(hit_or_miss(m, e), hit_or_miss_oracle(m, e));
  }
}

TEST(ThinStep, FirstElementOnBlockRemovesTopMiddleOnly) {
  // Hand evaluation of the nine neighborhoods of a 3x3 white block.
  const auto block = from_rows({"###", "###", "###"});
  EXPECT_EQ(thin_step(block, golay_l_elements()[0]), from_rows({"#.#", "###", "###"}));
  const auto framed = from_rows({".....", ".###.", ".###.", ".###.", "....."});
  EXPECT_EQ(thin_step(framed, golay_l_elements()[0]),
            from_rows({".....", ".#.#.", ".###.", ".###.", "....."}));
}

TEST(ThinStep, IsSubsetAndBlackIsFixed) {
  std::mt19937 rng(8);
  EXPECT_TRUE(thin_step(BinaryMask(6, 6), golay_l_elements()[3]).empty());
  for (int t = 0; t < 30; ++t) {
    const auto m = testsupport::random_noise(rng, 40, 40, 0.6);
    for (const auto& e : golay_l_elements()) EXPECT_TRUE(subset(thin_step(m, e), m));
  }
}

TEST(Thinning, EmptyMask) {
  const auto r = thin_to_skeleton(BinaryMask(10, 10));
  EXPECT_TRUE(r.skeleton.empty());
  EXPECT_EQ(r.total_length, 0U);
  EXPECT_TRUE(r.per_component_lengths.empty());
}

TEST(Thinning, HorizontalRunIsUnchanged) {
  const auto m = testsupport::bar(20, 5, 3, 2, 10, 1);
  const auto r = thin_to_skeleton(m);
  EXPECT_EQ(r.skeleton, m);
  EXPECT_EQ(r.total_length, 10U);
  EXPECT_EQ(r.passes, 1);
}

TEST(Thinning, LinesKeepTheirLength) {
  for (int n = 2; n <= 64; ++n) {
    const auto h = testsupport::line(80, 80, 5, 7, 5 + n - 1, 7);
    const auto v = testsupport::line(80, 80, 9, 3, 9, 3 + n - 1);
    const auto d = testsupport::line(80, 80, 2, 2, 2 + n - 1, 2 + n - 1);
    EXPECT_EQ(thin_to_skeleton(h).total_length, static_cast<std::size_t>(n)) << n;
    EXPECT_EQ(thin_to_skeleton(v).total_length, static_cast<std::size_t>(n)) << n;
    EXPECT_EQ(thin_to_skeleton(d).total_length, static_cast<std::size_t>(n)) << n;
  }
}

TEST(Thinning, LineTouchingTheBorderKeepsItsLength) {
  const auto m = testsupport::bar(30, 4, 0, 0, 30, 1);
  EXPECT_EQ(thin_to_skeleton(m).total_length, 30U);
}

TEST(Thinning, FilledRectangleRegression) {
  const auto m = testsupport::bar(20, 9, 5, 3, 10, 3);
  const auto r = thin_to_skeleton(m);
  EXPECT_EQ(r.skeleton, thin_oracle(m));
  EXPECT_GE(r.total_length, 8U);
  EXPECT_LE(r.total_length, 12U);
  EXPECT_TRUE(is_width_one(r.skeleton));
  EXPECT_EQ(testsupport::flood_fill_components(r.skeleton), 1);
  // Frozen from the reference thinning: a spine with two short corner spurs.
  EXPECT_EQ(testsupport::to_rows(r.skeleton),
            "....................\n"
            "....................\n"
            "....................\n"
            ".....#........#.....\n"
            ".....#########......\n"
            ".....#..............\n"
            "....................\n"
            "....................\n"
            "....................\n");
  EXPECT_EQ(r.total_length, 12U);
}

TEST(Thinning, GolayElementsAloneCanStallOnABlock) {
  // The first blob of the property suite: L elements alone leave 2x2 blocks
  // where branches meet.
  std::mt19937 rng(31337);
  std::uniform_int_distribution<int> dim(8, 96);
  const int w = dim(rng);
  const auto m = testsupport::random_blob(rng, w, dim(rng));
  ASSERT_TRUE(testsupport::has_2x2_block(thin_oracle(m, false)));
  const auto r = thin_to_skeleton(m);
  EXPECT_FALSE(testsupport::has_2x2_block(r.skeleton));
  EXPECT_EQ(testsupport::flood_fill_components(r.skeleton), testsupport::flood_fill_components(m));
  EXPECT_EQ(r.skeleton, thin_oracle(m));
}

TEST(Thinning, RandomBlobProperties) {
  std::mt19937 rng(31337);
  std::uniform_int_distribution<int> dim(8, 96);
  for (int t = 0; t < 60; ++t) {
    const auto m = testsupport::random_blob(rng, dim(rng), dim(rng));
    const auto r = thin_to_skeleton(m);
    ASSERT_TRUE(subset(r.skeleton, m)) << t;
    ASSERT_FALSE(testsupport::has_2x2_block(r.skeleton)) << t << "\n" << testsupport::to_rows(r.skeleton);
    ASSERT_EQ(thin_to_skeleton(r.skeleton).skeleton, r.skeleton) << t;
    ASSERT_EQ(testsupport::flood_fill_components(r.skeleton),
              testsupport::flood_fill_components(m))
        << t;
    ASSERT_EQ(r.total_length, r.skeleton.count());
    std::size_t sum = 0;
    for (const auto& c : r.per_component_lengths) sum += c.length;
    ASSERT_EQ(sum, r.total_length);
    ASSERT_EQ(thin_to_skeleton(m).skeleton, r.skeleton);  // deterministic
  }
}

TEST(Thinning, MatchesReferenceThinning) {
  std::mt19937 rng(77);
  std::uniform_int_distribution<int> dim(4, 48);
  for (int t = 0; t < 40; ++t) {
    const auto m = t % 2 == 0 ? testsupport::random_blob(rng, dim(rng), dim(rng))
                              : testsupport::random_noise(rng, dim(rng), dim(rng), 0.5);
    ASSERT_EQ(thin_to_skeleton(m).skeleton, thin_oracle(m)) << t;
  }
}

TEST(SkeletonLengths, Counting) {
  const auto empty = skeleton_lengths(BinaryMask(4, 4));
  EXPECT_EQ(empty.total, 0U);
  EXPECT_TRUE(empty.per_component.empty());

  const auto two = skeleton_lengths(from_rows({"#####....", ".........", "....#####"}));
  EXPECT_EQ(two.total, 10U);
  ASSERT_EQ(two.per_component.size(), 2U);
  EXPECT_EQ(two.per_component[0], (ComponentLength{1, 5}));
  EXPECT_EQ(two.per_component[1], (ComponentLength{2, 5}));

  const auto diag = skeleton_lengths(testsupport::line(10, 10, 1, 1, 7, 7));
  EXPECT_EQ(diag.total, 7U);
  ASSERT_EQ(diag.per_component.size(), 1U);
  EXPECT_EQ(diag.per_component[0].length, 7U);
}

TEST(SkeletonLengths, RejectsThickInput) {
  try {
    skeleton_lengths(from_rows({"##.", "##."}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::WidthViolation);
  }
}

TEST(DiagonalWeightedLength, StraightAndDiagonal) {
  EXPECT_DOUBLE_EQ(diagonal_weighted_length(testsupport::bar(10, 3, 0, 1, 6, 1)), 5.0);
  EXPECT_NEAR(diagonal_weighted_length(testsupport::line(10, 10, 0, 0, 4, 4)), 4 * std::sqrt(2.0),
              1e-12);
  EXPECT_DOUBLE_EQ(diagonal_weighted_length(BinaryMask(3, 3)), 0.0);
}
