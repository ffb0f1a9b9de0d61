#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "crackinspect/review_session.hpp"

namespace crackinspect {

/// Exact report.csv header.
inline constexpr std::string_view kReportHeader =
    "Filename,Date/Time Taken,Crack Types,No. of Confident Cracks,"
    "Average Confidence Score for Confident Cracks,No. of Possible Cracks,"
    "Average Confidence Score for Possible Cracks,Total Crack Length (pixels),"
    "Estimate Total Length (cm)";

double resolve_scale(const ScaleModel& model);

/// length_px * cm_per_px rounded to the nearest whole centimeter.
long long to_cm(std::size_t length_px, double cm_per_px);

struct ReportRow {
  std::string filename;
  std::string date_time;
  std::set<Orientation> crack_types;
  std::size_t confident_count = 0;
  std::optional<double> confident_avg_score;
  std::size_t possible_count = 0;
  std::optional<double> possible_avg_score;
  std::size_t total_length_px = 0;
  std::optional<double> total_length_cm;  // unrounded
};

/// True when an instance counts towards the report: outside the Rejected
/// bucket and not rejected by the operator.
bool included_in_report(const CrackInstance& instance) noexcept;

/// One row per Ready image, in session order.
std::vector<ReportRow> build_report(const ReviewSession& session);

/// "'Diagonal Crack', 'Horizontal Crack'" (alphabetical).
std::string format_crack_types(const std::set<Orientation>& types);

std::string format_report_row(const ReportRow& row);
std::string render_report_csv(std::span<const ReportRow> rows);

/// Creates Confident/ and Possible/ with per-image overlays and masks, plus
/// report.csv and session.json. Returns the number of report rows.
std::size_t write_outputs(const ReviewSession& session, const std::filesystem::path& out_dir);

/// Writes only report.csv. Returns the number of rows.
std::size_t write_report_csv(const ReviewSession& session, const std::filesystem::path& csv_path);

/// Union of the instances of one image that belong to `bucket` and are not
/// operator-rejected. Passing nullopt unions every reportable instance.
BinaryMask image_union_mask(const ReviewSession& session, const ImageEntry& image,
                            std::optional<TriageBucket> bucket);

/// Overlay PNG for one image: Confident instances green, Possible amber.
std::vector<std::uint8_t> render_image_overlay(const ReviewSession& session,
                                               const ImageEntry& image,
                                               std::optional<TriageBucket> bucket);

}  // namespace crackinspect
