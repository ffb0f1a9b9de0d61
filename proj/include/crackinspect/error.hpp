#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace crackinspect {

enum class ErrorCode {
  InvalidArgument = 1,
  InvalidPolygon,
  DimensionMismatch,
  NoDominantAxis,
  WidthViolation,
  Parse,
  Io,
  Backend,
  NotFound,
  InvalidState,
  PortBusy,
  Internal,
};

constexpr std::string_view error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid_argument";
    case ErrorCode::InvalidPolygon: return "invalid_polygon";
    case ErrorCode::DimensionMismatch: return "dimension_mismatch";
    case ErrorCode::NoDominantAxis: return "no_dominant_axis";
    case ErrorCode::WidthViolation: return "width_violation";
    case ErrorCode::Parse: return "parse";
    case ErrorCode::Io: return "io";
    case ErrorCode::Backend: return "backend";
    case ErrorCode::NotFound: return "not_found";
    case ErrorCode::InvalidState: return "invalid_state";
    case ErrorCode::PortBusy: return "port_busy";
    case ErrorCode::Internal: return "internal";
  }
  return "internal";
}

/// Every failure raised by the library carries one of the codes above so the
/// C boundary can translate it without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace crackinspect
