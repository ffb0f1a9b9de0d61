#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "crackinspect/mask.hpp"
#include "crackinspect/triage.hpp"

namespace crackinspect {

struct ImageRecord {
  std::string id;
  std::filesystem::path path;
  int width = 0;
  int height = 0;
  std::optional<std::string> captured_at;  // EXIF form "YYYY:MM:DD HH:MM:SS"
  std::optional<double> cm_per_px;

  std::string filename() const { return path.filename().string(); }

  friend bool operator==(const ImageRecord&, const ImageRecord&) = default;
};

/// Mask geometry stored as a crop placed at (x, y) in image coordinates.
struct MaskPatch {
  int x = 0;
  int y = 0;
  BinaryMask bits;

  friend bool operator==(const MaskPatch&, const MaskPatch&) = default;
};

using Geometry = std::variant<Polygon, MaskPatch>;

enum class Decision { Pending, Accepted, RejectedByOperator };

std::string_view to_string(Decision decision) noexcept;
std::optional<Decision> parse_decision(std::string_view text) noexcept;

struct CrackInstance {
  std::string id;
  std::string image_id;
  std::string label;  // detector-supplied class name, recorded but not used
  Geometry geometry = MaskPatch{};
  double score = 100.0;
  std::optional<Orientation> orientation;
  TriageBucket bucket = TriageBucket::Rejected;
  Decision decision = Decision::Pending;
  std::optional<std::string> decided_at;
  std::size_t length_px = 0;

  friend bool operator==(const CrackInstance&, const CrackInstance&) = default;
};

/// Rasterizes an instance into a full image-sized mask.
BinaryMask instance_mask(const Geometry& geometry, int width, int height);

/// Tight crop of a mask, or nullopt when it has no white pixel.
std::optional<MaskPatch> crop_to_patch(const BinaryMask& mask);

struct ScanWarning {
  std::filesystem::path path;
  std::string message;
};

struct ScanResult {
  std::vector<ImageRecord> images;
  std::vector<ScanWarning> warnings;
};

/// jpg/jpeg/png files (any case), sorted by filename, ids "img-0001"... in
/// that order.
ScanResult scan_directory(const std::filesystem::path& dir);

// Annotation interchange ---------------------------------------------------

struct AnnotationShape {
  std::string label;
  std::string shape_type = "polygon";
  std::vector<Point> points;
  std::optional<double> score;
  std::optional<MaskPatch> mask;  // shape_type "mask" extension
};

struct AnnotationDocument {
  std::string image_path;
  int image_width = 0;
  int image_height = 0;
  std::vector<AnnotationShape> shapes;
};

/// Parses the LabelMe-compatible JSON. Throws ErrorCode::Parse with line or
/// field context on malformed input; unknown fields are ignored.
AnnotationDocument parse_annotations(std::string_view text, std::string_view source_name);

std::string serialize_annotations(const AnnotationDocument& doc);

struct ImportResult {
  std::vector<CrackInstance> instances;
  std::vector<std::string> warnings;  // shapes that were dropped and why
};

/// Converts shapes to instances for `image`. Shapes without a score get
/// 100.0. Invalid shapes are dropped with a warning; the rest are kept.
/// Instance ids are "<image id>-i<NNN>" in shape order.
ImportResult instances_from_document(const AnnotationDocument& doc, const ImageRecord& image);

ImportResult import_annotations(const std::filesystem::path& file, const ImageRecord& image);

AnnotationDocument export_annotations(std::span<const CrackInstance> instances,
                                      const ImageRecord& image);

// Detection backends -------------------------------------------------------

struct ExternalCommandOptions {
  std::string command;
  std::chrono::milliseconds timeout{std::chrono::seconds(300)};
};

/// Runs `command "<image path>"` through /bin/sh and parses the annotation
/// JSON it prints. Non-zero exit, timeout or bad output throw
/// ErrorCode::Backend with captured stderr attached.
std::vector<CrackInstance> run_external_detector(const ExternalCommandOptions& options,
                                                 const ImageRecord& image);

struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // row-major

  std::uint8_t at(int x, int y) const {
    return pixels[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
                  static_cast<std::size_t>(x)];
  }
};

struct BaselineParams {
  int window = 31;             // odd side of the local-mean window, px
  double offset = 10.0;        // dark if pixel < local mean - offset
  double min_elongation = 4.0; // major/minor axis ratio
  std::size_t min_area = 30;   // px
};

/// Classical demo detector: local-mean threshold, 8-connected components,
/// elongation and area filters. Not a learned model.
std::vector<CrackInstance> baseline_detect(const GrayImage& image, const BaselineParams& params,
                                           std::string_view image_id = "img");

/// Major/minor axis ratio of the pixel set from its covariance eigenvalues.
/// Infinite for collinear sets.
double elongation(const BinaryMask& component);

}  // namespace crackinspect
