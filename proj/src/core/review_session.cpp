#include "crackinspect/review_session.hpp"

#include <ctime>

#include "crackinspect/error.hpp"
#include "crackinspect/image_io.hpp"
#include "json_codec.hpp"

namespace crackinspect {

using detail::json;

namespace {

constexpr int kFormatVersion = 1;

template <typename Enum, std::size_t N>
Enum enum_from(const json& j, const std::string& where, const Enum (&options)[N]) {
  const auto text = detail::string_at(j, where);
  for (auto e : options) {
    if (text == to_string(e)) return e;
  }
  throw Error(ErrorCode::Parse, where + ": unknown value '" + text + "'");
}

json optional_string(const std::optional<std::string>& s) { return s ? json(*s) : json(nullptr); }

std::optional<std::string> optional_string_from(const json& obj, const char* key,
                                                const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  return detail::string_at(*it, where + "." + key);
}

json scale_to_json(const ScaleModel& scale) {
  return std::visit(
      [](const auto& m) -> json {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, ExplicitCmPerPx>) {
          return {{"kind", "explicit"}, {"cm_per_px", m.cm_per_px}};
        } else if constexpr (std::is_same_v<T, ReferenceObject>) {
          return {{"kind", "reference"},
                  {"a", json::array({m.a.x, m.a.y})},
                  {"b", json::array({m.b.x, m.b.y})},
                  {"known_length_cm", m.known_length_cm}};
        } else {
          return {{"kind", "camera"}, {"distance_cm", m.distance_cm}, {"focal_px", m.focal_px}};
        }
      },
      scale);
}

Point point_from(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2) throw Error(ErrorCode::Parse, where + ": expected [x, y]");
  return {detail::number_at(j[0], where + "[0]"), detail::number_at(j[1], where + "[1]")};
}

ScaleModel scale_from_json(const json& j, const std::string& where) {
  const auto kind = detail::string_at(detail::require(j, "kind", where), where + ".kind");
  if (kind == "explicit") {
    return ExplicitCmPerPx{detail::number_at(detail::require(j, "cm_per_px", where), where + ".cm_per_px")};
  }
  if (kind == "reference") {
    return ReferenceObject{point_from(detail::require(j, "a", where), where + ".a"),
                           point_from(detail::require(j, "b", where), where + ".b"),
                           detail::number_at(detail::require(j, "known_length_cm", where),
                                             where + ".known_length_cm")};
  }
  if (kind == "camera") {
    return CameraGeometry{
        detail::number_at(detail::require(j, "distance_cm", where), where + ".distance_cm"),
        detail::number_at(detail::require(j, "focal_px", where), where + ".focal_px")};
  }
  throw Error(ErrorCode::Parse, where + ".kind: unknown scale model '" + kind + "'");
}

json detector_to_json(const DetectorBackend& d) {
  json j{{"kind", to_string(d.kind)}};
  switch (d.kind) {
    case DetectorKind::AnnotationImport: j["annotations_dir"] = d.annotations_dir; break;
    case DetectorKind::ExternalCommand:
      j["command"] = d.command.command;
      j["timeout_ms"] = d.command.timeout.count();
      break;
    case DetectorKind::Baseline:
      j["window"] = d.baseline.window;
      j["offset"] = d.baseline.offset;
      j["min_elongation"] = d.baseline.min_elongation;
      j["min_area"] = d.baseline.min_area;
      break;
  }
  return j;
}

DetectorBackend detector_from_json(const json& j, const std::string& where) {
  DetectorBackend d;
  d.kind = enum_from(detail::require(j, "kind", where), where + ".kind",
                     {DetectorKind::AnnotationImport, DetectorKind::ExternalCommand,
                      DetectorKind::Baseline});
  switch (d.kind) {
    case DetectorKind::AnnotationImport:
      d.annotations_dir = detail::string_at(detail::require(j, "annotations_dir", where),
                                            where + ".annotations_dir");
      break;
    case DetectorKind::ExternalCommand:
      d.command.command = detail::string_at(detail::require(j, "command", where), where + ".command");
      d.command.timeout = std::chrono::milliseconds(
          detail::require(j, "timeout_ms", where).get<long long>());
      break;
    case DetectorKind::Baseline:
      d.baseline.window = detail::int_at(detail::require(j, "window", where), where + ".window");
      d.baseline.offset = detail::number_at(detail::require(j, "offset", where), where + ".offset");
      d.baseline.min_elongation = detail::number_at(detail::require(j, "min_elongation", where),
                                                    where + ".min_elongation");
      d.baseline.min_area = static_cast<std::size_t>(
          detail::int_at(detail::require(j, "min_area", where), where + ".min_area"));
      break;
  }
  return d;
}

}  // namespace

std::string_view to_string(ImageStatus status) noexcept {
  switch (status) {
    case ImageStatus::Queued: return "Queued";
    case ImageStatus::Analyzing: return "Analyzing";
    case ImageStatus::Ready: return "Ready";
    case ImageStatus::Failed: return "Failed";
  }
  return "Queued";
}

std::string_view to_string(DetectorKind kind) noexcept {
  switch (kind) {
    case DetectorKind::AnnotationImport: return "annotations";
    case DetectorKind::ExternalCommand: return "command";
    case DetectorKind::Baseline: return "baseline";
  }
  return "annotations";
}

const ImageEntry* ReviewSession::find_image(std::string_view id) const {
  for (const auto& img : images) {
    if (img.record.id == id) return &img;
  }
  return nullptr;
}

ImageEntry* ReviewSession::find_image(std::string_view id) {
  return const_cast<ImageEntry*>(std::as_const(*this).find_image(id));
}

const CrackInstance* ReviewSession::find_instance(std::string_view id) const {
  for (const auto& inst : instances) {
    if (inst.id == id) return &inst;
  }
  return nullptr;
}

CrackInstance* ReviewSession::find_instance(std::string_view id) {
  return const_cast<CrackInstance*>(std::as_const(*this).find_instance(id));
}

bool ReviewSession::ready() const {
  for (const auto& img : images) {
    if (img.status == ImageStatus::Queued || img.status == ImageStatus::Analyzing) return false;
  }
  return true;
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  ::gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string session_to_json(const ReviewSession& s) {
  json images = json::array();
  for (const auto& e : s.images) {
    const auto& r = e.record;
    images.push_back({{"id", r.id},
                      {"path", r.path.string()},
                      {"filename", r.filename()},
                      {"width", r.width},
                      {"height", r.height},
                      {"captured_at", optional_string(r.captured_at)},
                      {"cm_per_px", r.cm_per_px ? json(*r.cm_per_px) : json(nullptr)},
                      {"status", to_string(e.status)},
                      {"error", optional_string(e.error)}});
  }
  json instances = json::array();
  for (const auto& i : s.instances) {
    instances.push_back(
        {{"id", i.id},
         {"image_id", i.image_id},
         {"label", i.label},
         {"score", i.score},
         {"bucket", to_string(i.bucket)},
         {"orientation", i.orientation ? json(to_string(*i.orientation)) : json(nullptr)},
         {"decision", to_string(i.decision)},
         {"decided_at", optional_string(i.decided_at)},
         {"length_px", i.length_px},
         {"geometry", detail::geometry_to_json(i.geometry)}});
  }
  json root{{"format", "crackinspect-session"},
            {"version", kFormatVersion},
            {"session_id", s.session_id},
            {"created_at", s.created_at},
            {"updated_at", s.updated_at},
            {"input_dir", s.input_dir},
            {"detector", detector_to_json(s.detector)},
            {"thresholds", {{"lower", s.thresholds.lower()}, {"upper", s.thresholds.upper()}}},
            {"orientation_tolerance_deg", s.orientation_tolerance_deg},
            {"scale", s.scale ? scale_to_json(*s.scale) : json(nullptr)},
            {"images", std::move(images)},
            {"instances", std::move(instances)}};
  return root.dump(2) + "\n";
}

ReviewSession session_from_json(std::string_view text, std::string_view source_name) {
  const json root = detail::parse_json(text, source_name);
  const std::string src(source_name);
  if (!root.is_object()) throw Error(ErrorCode::Parse, src + ": top level must be an object");
  if (detail::string_at(detail::require(root, "format", src), src + ": format") !=
      "crackinspect-session") {
    throw Error(ErrorCode::Parse, src + ": not a session file");
  }
  if (detail::int_at(detail::require(root, "version", src), src + ": version") != kFormatVersion) {
    throw Error(ErrorCode::Parse, src + ": unsupported session version");
  }

  ReviewSession s;
  s.session_id = detail::string_at(detail::require(root, "session_id", src), src + ": session_id");
  s.created_at = detail::string_at(detail::require(root, "created_at", src), src + ": created_at");
  s.updated_at = detail::string_at(detail::require(root, "updated_at", src), src + ": updated_at");
  s.input_dir = detail::string_at(detail::require(root, "input_dir", src), src + ": input_dir");
  s.detector = detector_from_json(detail::require(root, "detector", src), src + ": detector");
  const auto& th = detail::require(root, "thresholds", src);
  try {
    s.thresholds = TriageThresholds(
        detail::number_at(detail::require(th, "lower", src + ": thresholds"), src + ": thresholds.lower"),
        detail::number_at(detail::require(th, "upper", src + ": thresholds"), src + ": thresholds.upper"));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Parse) throw;
    throw Error(ErrorCode::Parse, src + ": thresholds: " + e.what());
  }
  s.orientation_tolerance_deg = detail::number_at(
      detail::require(root, "orientation_tolerance_deg", src), src + ": orientation_tolerance_deg");
  if (auto it = root.find("scale"); it != root.end() && !it->is_null()) {
    s.scale = scale_from_json(*it, src + ": scale");
  }

  const auto& images = detail::require(root, "images", src);
  if (!images.is_array()) throw Error(ErrorCode::Parse, src + ": images: expected an array");
  for (std::size_t k = 0; k < images.size(); ++k) {
    const auto where = src + ": images[" + std::to_string(k) + "]";
    const auto& j = images[k];
    ImageEntry e;
    e.record.id = detail::string_at(detail::require(j, "id", where), where + ".id");
    e.record.path = detail::string_at(detail::require(j, "path", where), where + ".path");
    e.record.width = detail::int_at(detail::require(j, "width", where), where + ".width");
    e.record.height = detail::int_at(detail::require(j, "height", where), where + ".height");
    e.record.captured_at = optional_string_from(j, "captured_at", where);
    if (auto it = j.find("cm_per_px"); it != j.end() && !it->is_null()) {
      e.record.cm_per_px = detail::number_at(*it, where + ".cm_per_px");
    }
    e.status = enum_from(detail::require(j, "status", where), where + ".status",
                         {ImageStatus::Queued, ImageStatus::Analyzing, ImageStatus::Ready,
                          ImageStatus::Failed});
    e.error = optional_string_from(j, "error", where);
    if (e.record.width <= 0 || e.record.height <= 0) {
      throw Error(ErrorCode::Parse, where + ": image dimensions must be positive");
    }
    s.images.push_back(std::move(e));
  }

  const auto& instances = detail::require(root, "instances", src);
  if (!instances.is_array()) throw Error(ErrorCode::Parse, src + ": instances: expected an array");
  for (std::size_t k = 0; k < instances.size(); ++k) {
    const auto where = src + ": instances[" + std::to_string(k) + "]";
    const auto& j = instances[k];
    CrackInstance i;
    i.id = detail::string_at(detail::require(j, "id", where), where + ".id");
    i.image_id = detail::string_at(detail::require(j, "image_id", where), where + ".image_id");
    i.label = detail::string_at(detail::require(j, "label", where), where + ".label");
    i.geometry = detail::geometry_from_json(detail::require(j, "geometry", where), where + ".geometry");
    i.score = detail::number_at(detail::require(j, "score", where), where + ".score");
    i.bucket = enum_from(detail::require(j, "bucket", where), where + ".bucket",
                         {TriageBucket::Rejected, TriageBucket::Possible, TriageBucket::Confident});
    if (auto o = optional_string_from(j, "orientation", where)) {
      const auto parsed = parse_orientation(*o);
      if (!parsed) throw Error(ErrorCode::Parse, where + ".orientation: unknown value '" + *o + "'");
      i.orientation = parsed;
    }
    i.decision = enum_from(detail::require(j, "decision", where), where + ".decision",
                           {Decision::Pending, Decision::Accepted, Decision::RejectedByOperator});
    i.decided_at = optional_string_from(j, "decided_at", where);
    const auto& len = detail::require(j, "length_px", where);
    if (!len.is_number_unsigned() && !(len.is_number_integer() && len.get<long long>() >= 0)) {
      throw Error(ErrorCode::Parse, where + ".length_px: expected a non-negative integer");
    }
    i.length_px = len.get<std::size_t>();
    if (!(i.score >= 0.0 && i.score <= 100.0)) {
      throw Error(ErrorCode::Parse, where + ".score: outside [0, 100]");
    }
    if (s.find_image(i.image_id) == nullptr) {
      throw Error(ErrorCode::Parse, where + ".image_id: unknown image '" + i.image_id + "'");
    }
    s.instances.push_back(std::move(i));
  }
  return s;
}

ReviewSession load_session(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  return session_from_json(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()),
                           path.string());
}

void save_session(const ReviewSession& session, const std::filesystem::path& path) {
  write_file_atomic(path, session_to_json(session));
}

}  // namespace crackinspect
