#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "crackinspect/mask.hpp"

namespace testsupport {

using crackinspect::BinaryMask;

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "ci");
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const noexcept { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

void write_text(const std::filesystem::path& file, const std::string& text);
std::string read_text(const std::filesystem::path& file);

// Oracles ---------------------------------------------------------------------

/// W. Randolph Franklin's PNPOLY crossing test.
bool pnpoly(const std::vector<crackinspect::Point>& poly, double x, double y);

/// Component count by explicit-stack flood fill, 8-connectivity.
int flood_fill_components(const BinaryMask& mask);

/// Per-pixel intersection and union counts.
struct Counts {
  std::size_t inter = 0;
  std::size_t uni = 0;
};
Counts brute_counts(const BinaryMask& a, const BinaryMask& b);

bool has_2x2_block(const BinaryMask& mask);

/// Mask from text rows, '#' or '1' white.
BinaryMask from_rows(const std::vector<std::string>& rows);
std::string to_rows(const BinaryMask& mask);

// Generators ------------------------------------------------------------------

BinaryMask random_noise(std::mt19937& rng, int w, int h, double density);

/// Union of a few filled discs, ellipses and thick line segments, the kind of
/// blob the thinning properties are stated over.
BinaryMask random_blob(std::mt19937& rng, int w, int h);

BinaryMask rotate90(const BinaryMask& mask);  // clockwise, (x, y) -> (h-1-y, x)

BinaryMask bar(int w, int h, int x0, int y0, int bw, int bh);

/// 1-px Bresenham segment.
BinaryMask line(int w, int h, int x0, int y0, int x1, int y1);

// Image fixtures --------------------------------------------------------------

/// Gray JPEG or PNG (by extension) filled with `gray`.
void write_gray_image(const std::filesystem::path& file, int w, int h, std::uint8_t gray);

/// Baseline JPEG with an APP1 Exif segment carrying DateTimeOriginal.
void write_jpeg_with_exif(const std::filesystem::path& file, int w, int h,
                          const std::string& datetime_original);

}  // namespace testsupport
