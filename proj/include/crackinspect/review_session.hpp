#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "crackinspect/ingest.hpp"
#include "crackinspect/triage.hpp"

namespace crackinspect {

enum class ImageStatus { Queued, Analyzing, Ready, Failed };

std::string_view to_string(ImageStatus status) noexcept;

enum class DetectorKind { AnnotationImport, ExternalCommand, Baseline };

std::string_view to_string(DetectorKind kind) noexcept;

struct DetectorBackend {
  DetectorKind kind = DetectorKind::AnnotationImport;
  std::string annotations_dir;  // AnnotationImport
  ExternalCommandOptions command;  // ExternalCommand
  BaselineParams baseline;         // Baseline
};

// Scale models ---------------------------------------------------------------

struct ExplicitCmPerPx {
  double cm_per_px = 0.0;
};

struct ReferenceObject {
  Point a;
  Point b;
  double known_length_cm = 0.0;
};

struct CameraGeometry {
  double distance_cm = 0.0;
  double focal_px = 0.0;
};

using ScaleModel = std::variant<ExplicitCmPerPx, ReferenceObject, CameraGeometry>;

struct ImageEntry {
  ImageRecord record;
  ImageStatus status = ImageStatus::Queued;
  std::optional<std::string> error;
};

/// Complete persisted state of one inspection run.
struct ReviewSession {
  std::string session_id;
  std::string input_dir;
  DetectorBackend detector;
  TriageThresholds thresholds;
  double orientation_tolerance_deg = kDefaultOrientationToleranceDeg;
  std::optional<ScaleModel> scale;
  std::vector<ImageEntry> images;
  std::vector<CrackInstance> instances;  // grouped by image, image order
  std::string created_at;
  std::string updated_at;

  const ImageEntry* find_image(std::string_view id) const;
  ImageEntry* find_image(std::string_view id);
  const CrackInstance* find_instance(std::string_view id) const;
  CrackInstance* find_instance(std::string_view id);

  /// True when no image is still queued or analyzing.
  bool ready() const;
};

/// UTC "YYYY-MM-DDTHH:MM:SSZ".
std::string utc_timestamp();

std::string session_to_json(const ReviewSession& session);
ReviewSession session_from_json(std::string_view text, std::string_view source_name);

ReviewSession load_session(const std::filesystem::path& path);
/// Atomic replace: readers see either the previous or the new file.
void save_session(const ReviewSession& session, const std::filesystem::path& path);

}  // namespace crackinspect
