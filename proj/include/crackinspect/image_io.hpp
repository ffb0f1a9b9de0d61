#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "crackinspect/ingest.hpp"
#include "crackinspect/mask.hpp"

namespace crackinspect {

struct ImageInfo {
  int width = 0;
  int height = 0;
  std::optional<std::string> captured_at;
};

/// Reads dimensions and capture time from the file header without decoding
/// pixels. Supports JPEG and PNG. Throws ErrorCode::Io on unreadable or
/// unrecognized files.
ImageInfo probe_image(const std::filesystem::path& path);
ImageInfo probe_image_bytes(std::span<const std::uint8_t> bytes);

/// Capture time from a TIFF-structured EXIF block: DateTimeOriginal when
/// present, else DateTime.
std::optional<std::string> exif_capture_time(std::span<const std::uint8_t> tiff);

GrayImage load_gray(const std::filesystem::path& path);
GrayImage decode_gray(std::span<const std::uint8_t> bytes);

/// Single-channel PNG, 0 = black, 255 = white. Decoding treats any non-zero
/// sample as white.
std::vector<std::uint8_t> encode_mask_png(const BinaryMask& mask);
BinaryMask decode_mask_png(std::span<const std::uint8_t> bytes);
void write_mask_png(const BinaryMask& mask, const std::filesystem::path& path);
BinaryMask read_mask_png(const std::filesystem::path& path);

using Rgb = std::array<std::uint8_t, 3>;

struct OverlayLayer {
  const BinaryMask* mask = nullptr;
  Rgb color{255, 0, 0};
};

/// Blends the layers at 50% over the source image (or a mid-gray canvas when
/// the source cannot be decoded) and encodes the result as PNG.
std::vector<std::uint8_t> render_overlay_png(const std::filesystem::path& source, int width,
                                             int height, std::span<const OverlayLayer> layers);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
/// Writes to a sibling temporary then renames over the target.
void write_file_atomic(const std::filesystem::path& path, std::string_view text);

}  // namespace crackinspect
