#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "crackinspect/metrics.hpp"
#include "crackinspect/review_session.hpp"

namespace crackinspect {

/// Per-image records for a reviewed session. IoU (All) uses every instance
/// outside the Rejected bucket, IoU (TP) the accepted ones; TP and FP are the
/// accepted and operator-rejected counts. Ground truth for an image is
/// `<gt_dir>/<stem>.json`; a missing file means no cracks.
std::vector<EvalRecord> evaluate_session(const ReviewSession& session,
                                         const std::filesystem::path& gt_dir);

/// Per-image records for a directory of prediction annotations, paired with
/// ground truth by file stem. Every predicted shape counts for IoU (All); a
/// shape is a true positive when it overlaps the ground truth.
std::vector<EvalRecord> evaluate_annotation_dirs(const std::filesystem::path& pred_dir,
                                                 const std::filesystem::path& gt_dir);

/// Dispatches on `predictions`: a directory is read as annotations, a file as
/// a session.
std::vector<EvalRecord> evaluate_predictions(const std::filesystem::path& predictions,
                                             const std::filesystem::path& gt_dir);

/// Per-image table followed by a blank line and the box-statistics summary.
/// IoU values to 3 decimals, "N/A" when undefined.
std::string render_evaluation_csv(std::span<const EvalRecord> records);

}  // namespace crackinspect
