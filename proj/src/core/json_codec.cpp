#include "json_codec.hpp"

#include <cmath>

namespace crackinspect::detail {

namespace {

constexpr char kHex[] = "0123456789abcdef";

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::Parse, where + ": " + what);
}

}  // namespace

std::string bits_to_hex(const BinaryMask& mask) {
  const std::size_t total = static_cast<std::size_t>(mask.width()) * mask.height();
  std::string out;
  out.reserve((total + 7) / 8 * 2);
  std::uint8_t byte = 0;
  std::size_t k = 0;
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      byte = static_cast<std::uint8_t>(byte << 1 | (mask.get(x, y) ? 1 : 0));
      if (++k % 8 == 0) {
        out.push_back(kHex[byte >> 4]);
        out.push_back(kHex[byte & 15]);
        byte = 0;
      }
    }
  }
  if (k % 8 != 0) {
    byte = static_cast<std::uint8_t>(byte << (8 - k % 8));
    out.push_back(kHex[byte >> 4]);
    out.push_back(kHex[byte & 15]);
  }
  return out;
}

BinaryMask bits_from_hex(std::string_view hex, int width, int height) {
  BinaryMask mask(width, height);
  const std::size_t total = static_cast<std::size_t>(width) * height;
  if (hex.size() != (total + 7) / 8 * 2) {
    throw Error(ErrorCode::Parse, "mask bit string has " + std::to_string(hex.size()) +
                                      " hex digits, expected " +
                                      std::to_string((total + 7) / 8 * 2));
  }
  for (std::size_t k = 0; k < total; ++k) {
    const int nibble = hex_value(hex[k / 4]);
    if (nibble < 0) throw Error(ErrorCode::Parse, "mask bit string is not hexadecimal");
    if ((nibble >> (3 - k % 4)) & 1) {
      mask.set(static_cast<int>(k % static_cast<std::size_t>(width)),
               static_cast<int>(k / static_cast<std::size_t>(width)));
    }
  }
  return mask;
}

json patch_to_json(const MaskPatch& patch) {
  return json{{"x", patch.x},
              {"y", patch.y},
              {"width", patch.bits.width()},
              {"height", patch.bits.height()},
              {"bits", bits_to_hex(patch.bits)}};
}

MaskPatch patch_from_json(const json& j, const std::string& where) {
  if (!j.is_object()) fail(where, "expected an object");
  const int x = int_at(require(j, "x", where), where + ".x");
  const int y = int_at(require(j, "y", where), where + ".y");
  const int w = int_at(require(j, "width", where), where + ".width");
  const int h = int_at(require(j, "height", where), where + ".height");
  if (x < 0 || y < 0 || w <= 0 || h <= 0) fail(where, "mask placement must be non-negative with positive size");
  try {
    return MaskPatch{x, y, bits_from_hex(string_at(require(j, "bits", where), where + ".bits"), w, h)};
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Parse) fail(where + ".bits", e.what());
    throw;
  }
}

json geometry_to_json(const Geometry& geometry) {
  if (const auto* poly = std::get_if<Polygon>(&geometry)) {
    json points = json::array();
    for (const auto& p : poly->vertices()) points.push_back(json::array({p.x, p.y}));
    return json{{"type", "polygon"}, {"points", std::move(points)}};
  }
  json j = patch_to_json(std::get<MaskPatch>(geometry));
  j["type"] = "mask";
  return j;
}

Geometry geometry_from_json(const json& j, const std::string& where) {
  if (!j.is_object()) fail(where, "expected an object");
  const auto type = string_at(require(j, "type", where), where + ".type");
  if (type == "mask") return patch_from_json(j, where);
  if (type != "polygon") fail(where + ".type", "unknown geometry type '" + type + "'");
  const auto& pts = require(j, "points", where);
  if (!pts.is_array()) fail(where + ".points", "expected an array");
  std::vector<Point> points;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const auto at = where + ".points[" + std::to_string(k) + "]";
    if (!pts[k].is_array() || pts[k].size() != 2) fail(at, "expected [x, y]");
    points.push_back({number_at(pts[k][0], at + "[0]"), number_at(pts[k][1], at + "[1]")});
  }
  try {
    return Polygon(std::move(points));
  } catch (const Error& e) {
    fail(where, e.what());
  }
}

const json& require(const json& obj, const char* key, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end()) fail(where, std::string("missing field '") + key + "'");
  return *it;
}

double number_at(const json& j, const std::string& where) {
  if (!j.is_number()) fail(where, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(where, "expected a finite number");
  return v;
}

int int_at(const json& j, const std::string& where) {
  if (!j.is_number_integer()) fail(where, "expected an integer");
  const auto v = j.get<long long>();
  if (v < INT32_MIN || v > INT32_MAX) fail(where, "integer out of range");
  return static_cast<int>(v);
}

std::string string_at(const json& j, const std::string& where) {
  if (!j.is_string()) fail(where, "expected a string");
  return j.get<std::string>();
}

json parse_json(std::string_view text, std::string_view source_name) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t offset = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    std::size_t line = 1;
    std::size_t column = 1;
    for (std::size_t k = 0; k < offset; ++k) {
      if (text[k] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw Error(ErrorCode::Parse, std::string(source_name) + ":" + std::to_string(line) + ":" +
                                      std::to_string(column) + ": malformed JSON");
  }
}

}  // namespace crackinspect::detail
