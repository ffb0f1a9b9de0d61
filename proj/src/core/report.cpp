#include "crackinspect/report.hpp"

#include <algorithm>
#include <cmath>
#include <system_error>

#include <fmt/format.h>

#include "crackinspect/error.hpp"
#include "crackinspect/image_io.hpp"

namespace crackinspect {

double resolve_scale(const ScaleModel& model) {
  return std::visit(
      [](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, ExplicitCmPerPx>) {
          if (!(m.cm_per_px > 0.0) || !std::isfinite(m.cm_per_px)) {
            throw Error(ErrorCode::InvalidArgument, "cm-per-pixel must be positive");
          }
          return m.cm_per_px;
        } else if constexpr (std::is_same_v<T, ReferenceObject>) {
          const double px = std::hypot(m.b.x - m.a.x, m.b.y - m.a.y);
          if (!(px > 0.0)) {
            throw Error(ErrorCode::InvalidArgument, "reference points coincide");
          }
          if (!(m.known_length_cm > 0.0)) {
            throw Error(ErrorCode::InvalidArgument, "reference length must be positive");
          }
          return m.known_length_cm / px;
        } else {
          if (!(m.distance_cm > 0.0) || !(m.focal_px > 0.0)) {
            throw Error(ErrorCode::InvalidArgument,
                        "camera distance and focal length must be positive");
          }
          return m.distance_cm / m.focal_px;
        }
      },
      model);
}

long long to_cm(std::size_t length_px, double cm_per_px) {
  return std::llround(static_cast<double>(length_px) * cm_per_px);
}

bool included_in_report(const CrackInstance& instance) noexcept {
  return instance.bucket != TriageBucket::Rejected &&
         instance.decision != Decision::RejectedByOperator;
}

std::vector<ReportRow> build_report(const ReviewSession& session) {
  std::vector<ReportRow> rows;
  for (const auto& image : session.images) {
    if (image.status != ImageStatus::Ready) continue;
    ReportRow row;
    row.filename = image.record.filename();
    row.date_time = image.record.captured_at.value_or("");
    double confident_sum = 0.0;
    double possible_sum = 0.0;
    for (const auto& inst : session.instances) {
      if (inst.image_id != image.record.id || !included_in_report(inst)) continue;
      if (inst.orientation) row.crack_types.insert(*inst.orientation);
      if (inst.bucket == TriageBucket::Confident) {
        ++row.confident_count;
        confident_sum += inst.score;
      } else {
        ++row.possible_count;
        possible_sum += inst.score;
      }
      row.total_length_px += inst.length_px;
    }
    if (row.confident_count > 0) {
      row.confident_avg_score = confident_sum / static_cast<double>(row.confident_count);
    }
    if (row.possible_count > 0) {
      row.possible_avg_score = possible_sum / static_cast<double>(row.possible_count);
    }
    if (image.record.cm_per_px) {
      row.total_length_cm = static_cast<double>(row.total_length_px) * *image.record.cm_per_px;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string format_crack_types(const std::set<Orientation>& types) {
  std::vector<std::string_view> names;
  for (auto t : types) names.push_back(to_string(t));
  std::sort(names.begin(), names.end());
  std::string out;
  for (std::size_t k = 0; k < names.size(); ++k) {
    if (k > 0) out += ", ";
    out += fmt::format("'{}'", names[k]);
  }
  return out;
}

namespace {

std::string csv_field(std::string_view value) {
  if (value.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(value);
  std::string out = "\"";
  for (char c : value) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

std::string format_report_row(const ReportRow& row) {
  auto avg = [](const std::optional<double>& v) {
    return v ? fmt::format("{:.1f}", *v) : std::string();
  };
  return fmt::format("{},{},{},{},{},{},{},{},{}", csv_field(row.filename),
                     csv_field(row.date_time), csv_field(format_crack_types(row.crack_types)),
                     row.confident_count, avg(row.confident_avg_score), row.possible_count,
                     avg(row.possible_avg_score), row.total_length_px,
                     row.total_length_cm ? fmt::format("{}", std::llround(*row.total_length_cm))
                                         : std::string());
}

std::string render_report_csv(std::span<const ReportRow> rows) {
  std::string out(kReportHeader);
  out += "\n";
  for (const auto& row : rows) {
    out += format_report_row(row);
    out += "\n";
  }
  return out;
}

std::size_t write_report_csv(const ReviewSession& session, const std::filesystem::path& csv_path) {
  const auto rows = build_report(session);
  write_file_atomic(csv_path, render_report_csv(rows));
  return rows.size();
}

BinaryMask image_union_mask(const ReviewSession& session, const ImageEntry& image,
                            std::optional<TriageBucket> bucket) {
  const int w = image.record.width;
  const int h = image.record.height;
  BinaryMask out(w, h);
  for (const auto& inst : session.instances) {
    if (inst.image_id != image.record.id || !included_in_report(inst)) continue;
    if (bucket && inst.bucket != *bucket) continue;
    const auto m = instance_mask(inst.geometry, w, h);
    auto dst = out.words();
    auto src = m.words();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] |= src[i];
  }
  return out;
}

std::vector<std::uint8_t> render_image_overlay(const ReviewSession& session,
                                               const ImageEntry& image,
                                               std::optional<TriageBucket> bucket) {
  std::vector<BinaryMask> masks;
  std::vector<OverlayLayer> layers;
  const bool possible = !bucket || *bucket == TriageBucket::Possible;
  const bool confident = !bucket || *bucket == TriageBucket::Confident;
  masks.reserve(2);
  if (possible) {
    masks.push_back(image_union_mask(session, image, TriageBucket::Possible));
    layers.push_back({nullptr, {255, 191, 0}});
  }
  if (confident) {
    masks.push_back(image_union_mask(session, image, TriageBucket::Confident));
    layers.push_back({nullptr, {0, 200, 0}});
  }
  for (std::size_t k = 0; k < layers.size(); ++k) layers[k].mask = &masks[k];
  return render_overlay_png(image.record.path, image.record.width, image.record.height, layers);
}

std::size_t write_outputs(const ReviewSession& session, const std::filesystem::path& out_dir) {
  std::error_code ec;
  for (const auto* sub : {"Confident", "Possible"}) {
    std::filesystem::create_directories(out_dir / sub, ec);
    if (ec) {
      throw Error(ErrorCode::Io, "cannot create " + (out_dir / sub).string() + ": " + ec.message());
    }
  }
  for (const auto& image : session.images) {
    if (image.status != ImageStatus::Ready) continue;
    for (auto bucket : {TriageBucket::Confident, TriageBucket::Possible}) {
      const auto mask = image_union_mask(session, image, bucket);
      if (mask.empty()) continue;
      const auto dir = out_dir / std::string(to_string(bucket));
      const auto stem = image.record.path.stem().string();
      write_file_bytes(dir / (stem + "_overlay.png"), render_image_overlay(session, image, bucket));
      write_mask_png(mask, dir / (stem + "_mask.png"));
    }
  }
  save_session(session, out_dir / "session.json");
  return write_report_csv(session, out_dir / "report.csv");
}

}  // namespace crackinspect
