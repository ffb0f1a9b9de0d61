#pragma once

#include <optional>
#include <string_view>

#include "crackinspect/mask.hpp"

namespace crackinspect {

class TriageThresholds {
 public:
  static constexpr double kDefaultLower = 60.0;
  static constexpr double kDefaultUpper = 85.0;

  TriageThresholds() = default;
  /// Requires 0 <= lower <= upper <= 100.
  TriageThresholds(double lower, double upper);

  double lower() const noexcept { return lower_; }
  double upper() const noexcept { return upper_; }

  friend bool operator==(const TriageThresholds&, const TriageThresholds&) = default;

 private:
  double lower_ = kDefaultLower;
  double upper_ = kDefaultUpper;
};

// Declaration order is the rank order: Rejected < Possible < Confident.
enum class TriageBucket { Rejected, Possible, Confident };

enum class Orientation { HorizontalCrack, VerticalCrack, DiagonalCrack };

inline constexpr double kDefaultOrientationToleranceDeg = 10.0;

std::string_view to_string(TriageBucket bucket) noexcept;
std::string_view to_string(Orientation orientation) noexcept;
std::optional<TriageBucket> parse_bucket(std::string_view text) noexcept;
std::optional<Orientation> parse_orientation(std::string_view text) noexcept;

/// score >= upper is Confident, lower <= score < upper is Possible, anything
/// lower is Rejected. Scores outside [0,100] throw.
TriageBucket triage(double score, const TriageThresholds& thresholds);

/// Principal-axis direction of the white pixels from second-order central
/// moments, in [0, 180) degrees from the +x axis (image coordinates).
double principal_angle(const BinaryMask& mask);

Orientation classify_orientation(const BinaryMask& mask,
                                 double tolerance_deg = kDefaultOrientationToleranceDeg);

}  // namespace crackinspect
