#include "crackinspect/evaluate.hpp"

#include <algorithm>
#include <map>
#include <optional>

#include <fmt/format.h>

#include "crackinspect/error.hpp"
#include "crackinspect/image_io.hpp"

namespace crackinspect {

namespace {

namespace fs = std::filesystem;

std::optional<AnnotationDocument> read_document(const fs::path& file) {
  std::error_code ec;
  if (!fs::is_regular_file(file, ec)) return std::nullopt;
  const auto bytes = read_file_bytes(file);
  return parse_annotations(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()),
                           file.string());
}

BinaryMask document_mask(const AnnotationDocument& doc, const ImageRecord& image) {
  std::vector<BinaryMask> masks;
  for (const auto& inst : instances_from_document(doc, image).instances) {
    masks.push_back(instance_mask(inst.geometry, image.width, image.height));
  }
  if (masks.empty()) return BinaryMask(image.width, image.height);
  return mask_union(masks);
}

BinaryMask ground_truth_for(const fs::path& gt_dir, const ImageRecord& image) {
  const auto doc = read_document(gt_dir / (image.path.stem().string() + ".json"));
  if (!doc) return BinaryMask(image.width, image.height);
  return document_mask(*doc, image);
}

std::map<std::string, fs::path> json_files_by_stem(const fs::path& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) {
    throw Error(ErrorCode::Io, dir.string() + " is not a directory");
  }
  std::map<std::string, fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") {
      out.emplace(entry.path().stem().string(), entry.path());
    }
  }
  return out;
}

std::string image_name(const AnnotationDocument& doc, const std::string& stem) {
  if (doc.image_path.empty()) return stem;
  return fs::path(doc.image_path).filename().string();
}

std::string format_iou(const IouValue& v) {
  return v ? fmt::format("{:.3f}", *v) : std::string("N/A");
}

std::string summary_row(std::string_view name, const BoxStats& b) {
  std::string outliers = "N/A";
  if (!b.outliers.empty()) {
    outliers.clear();
    for (std::size_t k = 0; k < b.outliers.size(); ++k) {
      outliers += fmt::format("{}{:.3f}", k == 0 ? "" : " ", b.outliers[k]);
    }
  }
  return fmt::format("{},{:.3f},{:.3f},{:.3f},{:.3f},{:.3f},{}\n", name, b.lower_adjacent,
                     b.lower_quartile, b.median, b.upper_quartile, b.upper_adjacent, outliers);
}

}  // namespace

std::vector<EvalRecord> evaluate_session(const ReviewSession& session, const fs::path& gt_dir) {
  std::vector<EvalRecord> out;
  for (const auto& image : session.images) {
    if (image.status != ImageStatus::Ready) continue;
    std::vector<CrackInstance> predicted;
    EvalRecord rec;
    rec.image_id = image.record.filename();
    for (const auto& inst : session.instances) {
      if (inst.image_id != image.record.id) continue;
      predicted.push_back(inst);
      if (inst.decision == Decision::Accepted) ++rec.true_positives;
      if (inst.decision == Decision::RejectedByOperator) ++rec.false_positives;
    }
    const auto gt = ground_truth_for(gt_dir, image.record);
    rec.iou_all = image_iou(predicted, gt, InstanceSubset::All);
    rec.iou_tp = image_iou(predicted, gt, InstanceSubset::AcceptedOnly);
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<EvalRecord> evaluate_annotation_dirs(const fs::path& pred_dir, const fs::path& gt_dir) {
  const auto preds = json_files_by_stem(pred_dir);
  const auto gts = json_files_by_stem(gt_dir);
  std::vector<std::string> stems;
  for (const auto& [stem, _] : preds) stems.push_back(stem);
  for (const auto& [stem, _] : gts) {
    if (!preds.contains(stem)) stems.push_back(stem);
  }
  std::sort(stems.begin(), stems.end());

  std::vector<EvalRecord> out;
  for (const auto& stem : stems) {
    std::optional<AnnotationDocument> pred;
    std::optional<AnnotationDocument> gt;
    if (auto it = preds.find(stem); it != preds.end()) pred = read_document(it->second);
    if (auto it = gts.find(stem); it != gts.end()) gt = read_document(it->second);
    const auto& ref = pred ? *pred : *gt;
    if (ref.image_width <= 0 || ref.image_height <= 0) {
      throw Error(ErrorCode::Parse, stem + ": annotation lacks imageWidth/imageHeight");
    }
    ImageRecord image;
    image.id = stem;
    image.path = stem;
    image.width = ref.image_width;
    image.height = ref.image_height;

    const BinaryMask truth = gt ? document_mask(*gt, image) : BinaryMask(image.width, image.height);
    EvalRecord rec;
    rec.image_id = image_name(ref, stem);
    BinaryMask all(image.width, image.height);
    BinaryMask tp(image.width, image.height);
    if (pred) {
      for (const auto& inst : instances_from_document(*pred, image).instances) {
        const auto m = instance_mask(inst.geometry, image.width, image.height);
        const bool hit = !mask_intersection(m, truth).empty();
        all = mask_union(std::vector{all, m});
        if (hit) {
          tp = mask_union(std::vector{tp, m});
          ++rec.true_positives;
        } else {
          ++rec.false_positives;
        }
      }
    }
    rec.iou_all = iou(all, truth);
    rec.iou_tp = iou(tp, truth);
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<EvalRecord> evaluate_predictions(const fs::path& predictions, const fs::path& gt_dir) {
  std::error_code ec;
  if (fs::is_directory(predictions, ec)) return evaluate_annotation_dirs(predictions, gt_dir);
  return evaluate_session(load_session(predictions), gt_dir);
}

std::string render_evaluation_csv(std::span<const EvalRecord> records) {
  std::string out = "Image Name,True Positives,False Positives,IoU (All),IoU (True Positives)\n";
  for (const auto& r : records) {
    out += fmt::format("{},{},{},{},{}\n", r.image_id, r.true_positives, r.false_positives,
                       format_iou(r.iou_all), format_iou(r.iou_tp));
  }
  const bool any = std::any_of(records.begin(), records.end(),
                               [](const EvalRecord& r) { return r.iou_all.has_value(); });
  if (!any) return out;
  const auto summary = evaluate_dataset(records);
  out += "\nExperiment,Lower Adjacent,Lower Quartile,Median,Upper Quartile,Upper Adjacent,Outliers\n";
  out += summary_row("IoU (All)", summary.all);
  if (summary.true_positives) out += summary_row("IoU (True Positives)", *summary.true_positives);
  return out;
}

}  // namespace crackinspect
