#include "crackinspect/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <limits>

#include "crackinspect/error.hpp"
#include "crackinspect/image_io.hpp"
#include "json_codec.hpp"

namespace crackinspect {

using detail::json;

std::string_view to_string(Decision decision) noexcept {
  switch (decision) {
    case Decision::Pending: return "Pending";
    case Decision::Accepted: return "Accepted";
    case Decision::RejectedByOperator: return "Rejected-by-operator";
  }
  return "Pending";
}

std::optional<Decision> parse_decision(std::string_view text) noexcept {
  for (auto d : {Decision::Pending, Decision::Accepted, Decision::RejectedByOperator}) {
    if (text == to_string(d)) return d;
  }
  return std::nullopt;
}

BinaryMask instance_mask(const Geometry& geometry, int width, int height) {
  if (const auto* poly = std::get_if<Polygon>(&geometry)) return rasterize(*poly, width, height);
  const auto& patch = std::get<MaskPatch>(geometry);
  BinaryMask out(width, height);
  for (int y = 0; y < patch.bits.height(); ++y) {
    const int iy = patch.y + y;
    if (iy >= height) break;
    for (int x = 0; x < patch.bits.width(); ++x) {
      const int ix = patch.x + x;
      if (ix >= width) break;
      if (patch.bits.get(x, y)) out.set(ix, iy);
    }
  }
  return out;
}

std::optional<MaskPatch> crop_to_patch(const BinaryMask& mask) {
  int x0 = mask.width(), y0 = mask.height(), x1 = -1, y1 = -1;
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (!mask.get(x, y)) continue;
      x0 = std::min(x0, x);
      y0 = std::min(y0, y);
      x1 = std::max(x1, x);
      y1 = std::max(y1, y);
    }
  }
  if (x1 < 0) return std::nullopt;
  MaskPatch patch{x0, y0, BinaryMask(x1 - x0 + 1, y1 - y0 + 1)};
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      if (mask.get(x, y)) patch.bits.set(x - x0, y - y0);
    }
  }
  return patch;
}

// Directory scan ------------------------------------------------------------

namespace {

bool has_image_extension(const std::filesystem::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".jpg" || ext == ".jpeg" || ext == ".png";
}

std::string image_id_for(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "img-%04zu", index + 1);
  return buf;
}

}  // namespace

ScanResult scan_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) {
    throw Error(ErrorCode::Io, "not a directory: " + dir.string());
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir, ec)) {
    if (entry.is_regular_file() && has_image_extension(entry.path())) files.push_back(entry.path());
  }
  if (ec) throw Error(ErrorCode::Io, "cannot list " + dir.string() + ": " + ec.message());
  std::sort(files.begin(), files.end(),
            [](const auto& a, const auto& b) { return a.filename().string() < b.filename().string(); });

  ScanResult result;
  for (const auto& file : files) {
    try {
      const auto info = probe_image(file);
      ImageRecord rec;
      rec.id = image_id_for(result.images.size());
      rec.path = file;
      rec.width = info.width;
      rec.height = info.height;
      rec.captured_at = info.captured_at;
      result.images.push_back(std::move(rec));
    } catch (const Error& e) {
      result.warnings.push_back({file, e.what()});
    }
  }
  return result;
}

// Annotation schema ---------------------------------------------------------

AnnotationDocument parse_annotations(std::string_view text, std::string_view source_name) {
  const json root = detail::parse_json(text, source_name);
  const std::string src(source_name);
  if (!root.is_object()) throw Error(ErrorCode::Parse, src + ": top level must be an object");

  AnnotationDocument doc;
  if (auto it = root.find("imagePath"); it != root.end() && !it->is_null()) {
    doc.image_path = detail::string_at(*it, src + ": imagePath");
  }
  if (auto it = root.find("imageWidth"); it != root.end() && !it->is_null()) {
    doc.image_width = detail::int_at(*it, src + ": imageWidth");
  }
  if (auto it = root.find("imageHeight"); it != root.end() && !it->is_null()) {
    doc.image_height = detail::int_at(*it, src + ": imageHeight");
  }
  const auto& shapes = detail::require(root, "shapes", src);
  if (!shapes.is_array()) throw Error(ErrorCode::Parse, src + ": shapes: expected an array");

  for (std::size_t k = 0; k < shapes.size(); ++k) {
    const auto where = src + ": shapes[" + std::to_string(k) + "]";
    const auto& s = shapes[k];
    if (!s.is_object()) throw Error(ErrorCode::Parse, where + ": expected an object");
    AnnotationShape shape;
    if (auto it = s.find("label"); it != s.end() && !it->is_null()) {
      shape.label = detail::string_at(*it, where + ".label");
    }
    if (auto it = s.find("shape_type"); it != s.end() && !it->is_null()) {
      shape.shape_type = detail::string_at(*it, where + ".shape_type");
    }
    if (auto it = s.find("score"); it != s.end() && !it->is_null()) {
      shape.score = detail::number_at(*it, where + ".score");
    }
    if (shape.shape_type == "mask") {
      shape.mask = detail::patch_from_json(detail::require(s, "mask", where), where + ".mask");
    } else {
      const auto& pts = detail::require(s, "points", where);
      if (!pts.is_array()) throw Error(ErrorCode::Parse, where + ".points: expected an array");
      for (std::size_t i = 0; i < pts.size(); ++i) {
        const auto at = where + ".points[" + std::to_string(i) + "]";
        if (!pts[i].is_array() || pts[i].size() != 2) {
          throw Error(ErrorCode::Parse, at + ": expected [x, y]");
        }
        shape.points.push_back(
            {detail::number_at(pts[i][0], at + "[0]"), detail::number_at(pts[i][1], at + "[1]")});
      }
    }
    doc.shapes.push_back(std::move(shape));
  }
  return doc;
}

std::string serialize_annotations(const AnnotationDocument& doc) {
  json shapes = json::array();
  for (const auto& s : doc.shapes) {
    json j{{"label", s.label}, {"shape_type", s.shape_type}};
    if (s.mask) {
      j["points"] = json::array();
      j["mask"] = detail::patch_to_json(*s.mask);
    } else {
      json pts = json::array();
      for (const auto& p : s.points) pts.push_back(json::array({p.x, p.y}));
      j["points"] = std::move(pts);
    }
    if (s.score) j["score"] = *s.score;
    shapes.push_back(std::move(j));
  }
  json root{{"imagePath", doc.image_path},
            {"imageHeight", doc.image_height},
            {"imageWidth", doc.image_width},
            {"shapes", std::move(shapes)}};
  return root.dump(2) + "\n";
}

ImportResult instances_from_document(const AnnotationDocument& doc, const ImageRecord& image) {
  if ((doc.image_width != 0 && doc.image_width != image.width) ||
      (doc.image_height != 0 && doc.image_height != image.height)) {
    throw Error(ErrorCode::Parse, "annotation size " + std::to_string(doc.image_width) + "x" +
                                      std::to_string(doc.image_height) + " does not match image " +
                                      image.filename() + " (" + std::to_string(image.width) + "x" +
                                      std::to_string(image.height) + ")");
  }
  ImportResult out;
  for (std::size_t k = 0; k < doc.shapes.size(); ++k) {
    const auto& s = doc.shapes[k];
    const auto tag = "shape " + std::to_string(k);
    CrackInstance inst;
    inst.image_id = image.id;
    inst.label = s.label;
    inst.score = s.score.value_or(100.0);
    if (!(inst.score >= 0.0 && inst.score <= 100.0)) {
      out.warnings.push_back(tag + ": score " + std::to_string(inst.score) + " outside [0, 100]");
      continue;
    }
    try {
      if (s.shape_type == "mask" && s.mask) {
        inst.geometry = *s.mask;
      } else if (s.shape_type == "polygon") {
        inst.geometry = Polygon(s.points);
      } else if (s.shape_type == "rectangle" && s.points.size() == 2) {
        const auto [a, b] = std::pair{s.points[0], s.points[1]};
        inst.geometry = Polygon({{a.x, a.y}, {b.x, a.y}, {b.x, b.y}, {a.x, b.y}});
      } else {
        out.warnings.push_back(tag + ": unsupported shape_type '" + s.shape_type + "'");
        continue;
      }
    } catch (const Error& e) {
      out.warnings.push_back(tag + ": " + e.what());
      continue;
    }
    if (instance_mask(inst.geometry, image.width, image.height).empty()) {
      out.warnings.push_back(tag + ": covers no pixel center inside the image");
      continue;
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "-i%03zu", out.instances.size() + 1);
    inst.id = image.id + buf;
    out.instances.push_back(std::move(inst));
  }
  return out;
}

ImportResult import_annotations(const std::filesystem::path& file, const ImageRecord& image) {
  const auto bytes = read_file_bytes(file);
  const std::string_view text(reinterpret_cast<const char*>(bytes.data()), bytes.size());
  return instances_from_document(parse_annotations(text, file.string()), image);
}

AnnotationDocument export_annotations(std::span<const CrackInstance> instances,
                                      const ImageRecord& image) {
  AnnotationDocument doc;
  doc.image_path = image.filename();
  doc.image_width = image.width;
  doc.image_height = image.height;
  for (const auto& inst : instances) {
    AnnotationShape s;
    s.label = inst.label;
    s.score = inst.score;
    if (const auto* poly = std::get_if<Polygon>(&inst.geometry)) {
      s.points = poly->vertices();
    } else {
      s.shape_type = "mask";
      s.mask = std::get<MaskPatch>(inst.geometry);
    }
    doc.shapes.push_back(std::move(s));
  }
  return doc;
}

// Baseline detector ---------------------------------------------------------

namespace {

struct MomentSums {
  std::int64_t n = 0, sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  int x0 = INT32_MAX, y0 = INT32_MAX, x1 = -1, y1 = -1;

  void add(int x, int y) {
    ++n;
    x0 = std::min(x0, x);
    y0 = std::min(y0, y);
    x1 = std::max(x1, x);
    y1 = std::max(y1, y);
    sx += x;
    sy += y;
    sxx += std::int64_t{x} * x;
    syy += std::int64_t{y} * y;
    sxy += std::int64_t{x} * y;
  }

  double elongation() const {
    if (n < 2) return 1.0;
    const double a = static_cast<double>(n * sxx - sx * sx);
    const double c = static_cast<double>(n * syy - sy * sy);
    const double b = static_cast<double>(n * sxy - sx * sy);
    const double mean = 0.5 * (a + c);
    const double spread = std::sqrt(0.25 * (a - c) * (a - c) + b * b);
    const double major = mean + spread;
    const double minor = mean - spread;
    if (major <= 0.0) return 1.0;
    if (minor <= 0.0) return std::numeric_limits<double>::infinity();
    return std::sqrt(major / minor);
  }
};

}  // namespace

double elongation(const BinaryMask& component) {
  MomentSums m;
  for (int y = 0; y < component.height(); ++y) {
    for (int x = 0; x < component.width(); ++x) {
      if (component.get(x, y)) m.add(x, y);
    }
  }
  return m.elongation();
}

std::vector<CrackInstance> baseline_detect(const GrayImage& image, const BaselineParams& params,
                                           std::string_view image_id) {
  const int w = image.width;
  const int h = image.height;
  if (w <= 0 || h <= 0 || image.pixels.size() != static_cast<std::size_t>(w) * h) {
    throw Error(ErrorCode::InvalidArgument, "baseline detector needs a decoded image");
  }
  if (params.window < 1 || params.window % 2 == 0) {
    throw Error(ErrorCode::InvalidArgument, "baseline window must be a positive odd size");
  }

  // Integral image with a zero first row/column.
  std::vector<std::int64_t> integral(static_cast<std::size_t>(w + 1) * (h + 1), 0);
  auto I = [&](int x, int y) -> std::int64_t& {
    return integral[static_cast<std::size_t>(y) * (w + 1) + x];
  };
  for (int y = 0; y < h; ++y) {
    std::int64_t row = 0;
    for (int x = 0; x < w; ++x) {
      row += image.at(x, y);
      I(x + 1, y + 1) = I(x + 1, y) + row;
    }
  }

  // Windows are truncated at the border, which keeps the threshold symmetric
  // under mirroring.
  const int r = params.window / 2;
  BinaryMask dark(w, h);
  for (int y = 0; y < h; ++y) {
    const int ya = std::max(0, y - r), yb = std::min(h, y + r + 1);
    for (int x = 0; x < w; ++x) {
      const int xa = std::max(0, x - r), xb = std::min(w, x + r + 1);
      const std::int64_t sum = I(xb, yb) - I(xa, yb) - I(xb, ya) + I(xa, ya);
      const double area = static_cast<double>((xb - xa) * (yb - ya));
      if (image.at(x, y) * area < static_cast<double>(sum) - params.offset * area) dark.set(x, y);
    }
  }

  const auto comps = connected_components(dark);
  std::vector<MomentSums> moments(static_cast<std::size_t>(comps.count));
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (const auto l = comps.label_at(x, y)) moments[static_cast<std::size_t>(l - 1)].add(x, y);
    }
  }

  std::vector<CrackInstance> out;
  for (int k = 0; k < comps.count; ++k) {
    const auto& m = moments[static_cast<std::size_t>(k)];
    if (static_cast<std::size_t>(m.n) < params.min_area) continue;
    const double ratio = m.elongation();
    if (ratio < params.min_elongation) continue;
    CrackInstance inst;
    inst.image_id = std::string(image_id);
    inst.label = "crack";
    inst.score = std::min(100.0, 50.0 + 50.0 * (1.0 - 1.0 / ratio));
    MaskPatch patch{m.x0, m.y0, BinaryMask(m.x1 - m.x0 + 1, m.y1 - m.y0 + 1)};
    for (int y = m.y0; y <= m.y1; ++y) {
      for (int x = m.x0; x <= m.x1; ++x) {
        if (comps.label_at(x, y) == k + 1) patch.bits.set(x - m.x0, y - m.y0);
      }
    }
    inst.geometry = std::move(patch);
    char buf[32];
    std::snprintf(buf, sizeof buf, "-i%03zu", out.size() + 1);
    inst.id = std::string(image_id) + buf;
    out.push_back(std::move(inst));
  }
  return out;
}

}  // namespace crackinspect
