#pragma once

// JSON helpers shared by the annotation and session codecs.

#include <string>
#include <string_view>

#include <json.hpp>

#include "crackinspect/error.hpp"
#include "crackinspect/ingest.hpp"

namespace crackinspect::detail {

using nlohmann::json;

/// Row-major bits packed MSB-first into bytes, hex encoded.
std::string bits_to_hex(const BinaryMask& mask);
BinaryMask bits_from_hex(std::string_view hex, int width, int height);

json patch_to_json(const MaskPatch& patch);
MaskPatch patch_from_json(const json& j, const std::string& where);

json geometry_to_json(const Geometry& geometry);
Geometry geometry_from_json(const json& j, const std::string& where);

/// Field accessors that raise ErrorCode::Parse naming the offending path.
const json& require(const json& obj, const char* key, const std::string& where);
double number_at(const json& j, const std::string& where);
int int_at(const json& j, const std::string& where);
std::string string_at(const json& j, const std::string& where);

/// Parses text, converting library errors into ErrorCode::Parse with a
/// "source:line:column" prefix.
json parse_json(std::string_view text, std::string_view source_name);

}  // namespace crackinspect::detail
