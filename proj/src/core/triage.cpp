#include "crackinspect/triage.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>

#include "crackinspect/error.hpp"

namespace crackinspect {

TriageThresholds::TriageThresholds(double lower, double upper) : lower_(lower), upper_(upper) {
  if (!(lower >= 0.0 && lower <= upper && upper <= 100.0)) {
    throw Error(ErrorCode::InvalidArgument,
                "thresholds must satisfy 0 <= lower <= upper <= 100 (lower=" +
                    std::to_string(lower) + ", upper=" + std::to_string(upper) + ")");
  }
}

std::string_view to_string(TriageBucket bucket) noexcept {
  switch (bucket) {
    case TriageBucket::Confident: return "Confident";
    case TriageBucket::Possible: return "Possible";
    case TriageBucket::Rejected: return "Rejected";
  }
  return "Rejected";
}

std::string_view to_string(Orientation orientation) noexcept {
  switch (orientation) {
    case Orientation::HorizontalCrack: return "Horizontal Crack";
    case Orientation::VerticalCrack: return "Vertical Crack";
    case Orientation::DiagonalCrack: return "Diagonal Crack";
  }
  return "Diagonal Crack";
}

std::optional<TriageBucket> parse_bucket(std::string_view text) noexcept {
  for (auto b : {TriageBucket::Rejected, TriageBucket::Possible, TriageBucket::Confident}) {
    if (text == to_string(b)) return b;
  }
  return std::nullopt;
}

std::optional<Orientation> parse_orientation(std::string_view text) noexcept {
  for (auto o : {Orientation::HorizontalCrack, Orientation::VerticalCrack,
                 Orientation::DiagonalCrack}) {
    if (text == to_string(o)) return o;
  }
  return std::nullopt;
}

TriageBucket triage(double score, const TriageThresholds& thresholds) {
  if (!(score >= 0.0 && score <= 100.0)) {
    throw Error(ErrorCode::InvalidArgument,
                "confidence score " + std::to_string(score) + " outside [0, 100]");
  }
  if (score >= thresholds.upper()) return TriageBucket::Confident;
  if (score >= thresholds.lower()) return TriageBucket::Possible;
  return TriageBucket::Rejected;
}

namespace {

/// Central moments scaled by n^2 so they stay exact integers:
/// n*sum(x^2) - (sum x)^2 = n^2 * mu20, and likewise for the others.
struct ScaledMoments {
  std::int64_t n = 0;
  std::int64_t mu20 = 0;
  std::int64_t mu02 = 0;
  std::int64_t mu11 = 0;
};

ScaledMoments scaled_moments(const BinaryMask& mask) {
  std::int64_t n = 0, sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (!mask.get(x, y)) continue;
      ++n;
      sx += x;
      sy += y;
      sxx += std::int64_t{x} * x;
      syy += std::int64_t{y} * y;
      sxy += std::int64_t{x} * y;
    }
  }
  return {n, n * sxx - sx * sx, n * syy - sy * sy, n * sxy - sx * sy};
}

}  // namespace

double principal_angle(const BinaryMask& mask) {
  const auto m = scaled_moments(mask);
  if (m.n < 2) {
    throw Error(ErrorCode::NoDominantAxis,
                "principal axis needs at least 2 white pixels, got " + std::to_string(m.n));
  }
  if (m.mu11 == 0 && m.mu20 == m.mu02) {
    throw Error(ErrorCode::NoDominantAxis, "pixel set is isotropic; no dominant axis");
  }
  double deg = 0.5 * std::atan2(2.0 * static_cast<double>(m.mu11),
                                static_cast<double>(m.mu20 - m.mu02)) *
               180.0 / std::numbers::pi;
  if (deg < 0.0) deg += 180.0;
  if (deg >= 180.0) deg -= 180.0;
  return deg;
}

Orientation classify_orientation(const BinaryMask& mask, double tolerance_deg) {
  double angle = 0.0;
  try {
    angle = principal_angle(mask);
  } catch (const Error&) {
    // Too few pixels is a caller error; an isotropic blob has no direction.
    if (mask.count() < 2) throw;
    return Orientation::DiagonalCrack;
  }
  if (angle <= tolerance_deg || angle >= 180.0 - tolerance_deg) return Orientation::HorizontalCrack;
  if (std::abs(angle - 90.0) <= tolerance_deg) return Orientation::VerticalCrack;
  return Orientation::DiagonalCrack;
}

}  // namespace crackinspect
