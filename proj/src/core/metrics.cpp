#include "crackinspect/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "crackinspect/error.hpp"

namespace crackinspect {

bool selected(const CrackInstance& instance, InstanceSubset subset) noexcept {
  switch (subset) {
    case InstanceSubset::All: return instance.bucket != TriageBucket::Rejected;
    case InstanceSubset::AcceptedOnly: return instance.decision == Decision::Accepted;
  }
  return false;
}

IouValue image_iou(std::span<const CrackInstance> predicted, const BinaryMask& ground_truth,
                   InstanceSubset subset) {
  BinaryMask prediction(ground_truth.width(), ground_truth.height());
  for (const auto& inst : predicted) {
    if (!selected(inst, subset)) continue;
    const auto m = instance_mask(inst.geometry, ground_truth.width(), ground_truth.height());
    auto dst = prediction.words();
    auto src = m.words();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] |= src[i];
  }
  return iou(prediction, ground_truth);
}

namespace {

/// Median of an already sorted range.
double sorted_median(std::span<const double> v) {
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

BoxStats box_stats(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::InvalidArgument, "box statistics of an empty list");
  std::vector<double> v(values.begin(), values.end());
  for (double x : v) {
    if (!std::isfinite(x)) throw Error(ErrorCode::InvalidArgument, "box statistics need finite values");
  }
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  const std::span<const double> all(v);

  BoxStats s;
  s.median = sorted_median(all);
  if (n == 1) {
    s.lower_quartile = s.upper_quartile = s.median;
  } else {
    const std::size_t half = n / 2;  // odd n drops the middle element
    s.lower_quartile = sorted_median(all.first(half));
    s.upper_quartile = sorted_median(all.last(half));
  }
  const double iqr = s.upper_quartile - s.lower_quartile;
  const double low_fence = s.lower_quartile - 1.5 * iqr;
  const double high_fence = s.upper_quartile + 1.5 * iqr;

  s.lower_adjacent = s.lower_quartile;
  s.upper_adjacent = s.upper_quartile;
  bool have_low = false;
  for (double x : v) {
    if (x < low_fence || x > high_fence) {
      s.outliers.push_back(x);
      continue;
    }
    if (!have_low) {
      s.lower_adjacent = x;
      have_low = true;
    }
    s.upper_adjacent = x;
  }
  // Adjacent values never sit inside the box.
  s.lower_adjacent = std::min(s.lower_adjacent, s.lower_quartile);
  s.upper_adjacent = std::max(s.upper_adjacent, s.upper_quartile);
  return s;
}

double length_error_pct(double estimate_cm, double ground_truth_cm) {
  if (!(ground_truth_cm > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "ground-truth length must be positive");
  }
  return std::abs(estimate_cm - ground_truth_cm) / ground_truth_cm * 100.0;
}

DatasetSummary evaluate_dataset(std::span<const EvalRecord> records) {
  std::vector<double> all;
  std::vector<double> tp;
  for (const auto& r : records) {
    if (r.iou_all) all.push_back(*r.iou_all);
    if (r.iou_tp) tp.push_back(*r.iou_tp);
  }
  if (all.empty()) {
    throw Error(ErrorCode::InvalidArgument, "no record has a numeric IoU (All) value");
  }
  DatasetSummary out{box_stats(all), std::nullopt};
  if (!tp.empty()) out.true_positives = box_stats(tp);
  return out;
}

double round_to(double value, int decimals) {
  const double scale = std::pow(10.0, decimals);
  return std::round(value * scale) / scale;
}

}  // namespace crackinspect
