#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "crackinspect/ingest.hpp"
#include "crackinspect/mask.hpp"

namespace crackinspect {

struct EvalRecord {
  std::string image_id;
  IouValue iou_all;
  IouValue iou_tp;
  int true_positives = 0;
  int false_positives = 0;
};

/// Five-number box-plot summary with Tukey hinges and 1.5 IQR fences.
struct BoxStats {
  double lower_adjacent = 0.0;
  double lower_quartile = 0.0;
  double median = 0.0;
  double upper_quartile = 0.0;
  double upper_adjacent = 0.0;
  std::vector<double> outliers;  // ascending
};

enum class InstanceSubset {
  All,           // every instance outside the Rejected bucket
  AcceptedOnly,  // instances the operator accepted
};

bool selected(const CrackInstance& instance, InstanceSubset subset) noexcept;

/// Union of the selected instances against the ground-truth mask.
IouValue image_iou(std::span<const CrackInstance> predicted, const BinaryMask& ground_truth,
                   InstanceSubset subset);

/// Median; hinges are the medians of the lower and upper halves, which leave
/// out the overall median when n is odd. Throws on an empty list.
BoxStats box_stats(std::span<const double> values);

/// |estimate - truth| / truth * 100, unrounded.
double length_error_pct(double estimate_cm, double ground_truth_cm);

struct DatasetSummary {
  BoxStats all;
  std::optional<BoxStats> true_positives;  // absent when every TP value is N/A
};

/// Box statistics over the numeric IoU(All) and IoU(TP) columns; N/A rows are
/// skipped.
DatasetSummary evaluate_dataset(std::span<const EvalRecord> records);

/// Half-away-from-zero rounding to `decimals` places, for presentation.
double round_to(double value, int decimals);

}  // namespace crackinspect
