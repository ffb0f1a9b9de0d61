#include "crackinspect/session.hpp"

#include <algorithm>
#include <cstdio>

#include "crackinspect/error.hpp"
#include "crackinspect/image_io.hpp"
#include "crackinspect/report.hpp"
#include "crackinspect/skeleton.hpp"

namespace crackinspect {

// SessionStore ---------------------------------------------------------------

SessionStore::SessionStore(ReviewSession initial, std::filesystem::path file)
    : session_(std::move(initial)), file_(std::move(file)) {
  serialized_ = session_to_json(session_);
  write_file_atomic(file_, serialized_);
}

std::shared_ptr<SessionStore> SessionStore::open(const std::filesystem::path& file) {
  return std::make_shared<SessionStore>(load_session(file), file);
}

ReviewSession SessionStore::snapshot() const {
  std::lock_guard lock(mutex_);
  return session_;
}

void SessionStore::update(const std::function<void(ReviewSession&)>& mutation) {
  std::lock_guard lock(mutex_);
  ReviewSession next = session_;
  mutation(next);
  next.updated_at = session_.updated_at;
  auto text = session_to_json(next);
  if (text == serialized_) return;
  next.updated_at = utc_timestamp();
  text = session_to_json(next);
  write_file_atomic(file_, text);
  session_ = std::move(next);
  serialized_ = std::move(text);
}

// Transitions ------------------------------------------------------------------

void record_decision(ReviewSession& session, std::string_view instance_id, Decision verdict,
                     const std::string& timestamp) {
  if (verdict == Decision::Pending) {
    throw Error(ErrorCode::InvalidArgument, "a decision must accept or reject");
  }
  CrackInstance* inst = session.find_instance(instance_id);
  if (inst == nullptr) {
    throw Error(ErrorCode::NotFound, "no instance '" + std::string(instance_id) + "'");
  }
  const ImageEntry* image = session.find_image(inst->image_id);
  if (image == nullptr || image->status != ImageStatus::Ready) {
    throw Error(ErrorCode::InvalidState,
                "image of instance '" + inst->id + "' has not finished analysis");
  }
  if (inst->bucket == TriageBucket::Rejected) {
    throw Error(ErrorCode::InvalidState,
                "instance '" + inst->id + "' is below the lower threshold and not reviewable");
  }
  if (inst->decision == verdict) return;
  inst->decision = verdict;
  inst->decided_at = timestamp;
}

void retriage(ReviewSession& session, const TriageThresholds& thresholds) {
  if (!session.ready()) {
    throw Error(ErrorCode::InvalidState, "analysis is still running");
  }
  session.thresholds = thresholds;
  for (auto& inst : session.instances) {
    inst.bucket = triage(inst.score, thresholds);
    if (inst.bucket == TriageBucket::Rejected) {
      inst.decision = Decision::Pending;
      inst.decided_at.reset();
    }
  }
}

// Analysis ---------------------------------------------------------------------

namespace {

std::string session_id_for(const AnalyzeOptions& options) {
  // FNV-1a over the inputs that define the run.
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](std::string_view s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ULL;
    }
    h ^= 0xff;
    h *= 1099511628211ULL;
  };
  mix(options.input_dir.string());
  mix(to_string(options.detector.kind));
  mix(options.detector.annotations_dir);
  mix(options.detector.command.command);
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::vector<CrackInstance> detect(const ImageRecord& image, const DetectorBackend& detector) {
  switch (detector.kind) {
    case DetectorKind::AnnotationImport: {
      const auto file =
          std::filesystem::path(detector.annotations_dir) / (image.path.stem().string() + ".json");
      std::error_code ec;
      if (!std::filesystem::exists(file, ec)) return {};  // unlabeled image
      return import_annotations(file, image).instances;
    }
    case DetectorKind::ExternalCommand: return run_external_detector(detector.command, image);
    case DetectorKind::Baseline:
      return baseline_detect(load_gray(image.path), detector.baseline, image.id);
  }
  return {};
}

}  // namespace

std::vector<CrackInstance> analyze_image(const ImageRecord& image, const DetectorBackend& detector,
                                         const TriageThresholds& thresholds,
                                         double orientation_tolerance_deg) {
  std::vector<CrackInstance> out;
  for (auto& inst : detect(image, detector)) {
    // Thinning and moments are translation invariant and the image border is
    // black, so the tight crop gives the same skeleton as the full frame.
    const auto patch = crop_to_patch(instance_mask(inst.geometry, image.width, image.height));
    if (!patch) continue;
    inst.image_id = image.id;
    inst.bucket = triage(inst.score, thresholds);
    inst.orientation.reset();
    if (patch->bits.count() >= 2) {
      inst.orientation = classify_orientation(patch->bits, orientation_tolerance_deg);
    }
    inst.length_px = thin_to_skeleton(patch->bits).total_length;
    inst.decision = Decision::Pending;
    inst.decided_at.reset();
    out.push_back(std::move(inst));
  }
  return out;
}

std::unique_ptr<Analysis> Analysis::start(const AnalyzeOptions& options) {
  std::unique_ptr<Analysis> run(new Analysis());
  auto scan = scan_directory(options.input_dir);
  for (const auto& w : scan.warnings) run->warnings_.push_back(w.path.string() + ": " + w.message);

  std::optional<double> cm_per_px;
  if (options.scale) cm_per_px = resolve_scale(*options.scale);

  ReviewSession session;
  session.session_id = session_id_for(options);
  session.input_dir = options.input_dir.string();
  session.detector = options.detector;
  session.thresholds = options.thresholds;
  session.orientation_tolerance_deg = options.orientation_tolerance_deg;
  session.scale = options.scale;
  session.created_at = session.updated_at = utc_timestamp();
  for (auto& rec : scan.images) {
    rec.cm_per_px = cm_per_px;
    session.images.push_back({std::move(rec), ImageStatus::Queued, std::nullopt});
  }
  run->store_ = std::make_shared<SessionStore>(session, options.session_file);
  run->remaining_ = session.images.size();

  auto queue = std::make_shared<std::atomic<std::size_t>>(0);
  const auto images = session.images;
  const unsigned workers =
      std::max(1U, std::min<unsigned>(options.workers, static_cast<unsigned>(images.size())));
  if (images.empty()) return run;

  for (unsigned w = 0; w < workers; ++w) {
    run->workers_.emplace_back([run_ptr = run.get(), queue, images, options] {
      auto& store = *run_ptr->store_;
      for (;;) {
        const std::size_t k = queue->fetch_add(1);
        if (k >= images.size()) return;
        const auto& rec = images[k].record;
        try {
          store.update([&](ReviewSession& s) { s.find_image(rec.id)->status = ImageStatus::Analyzing; });
          auto found = analyze_image(rec, options.detector, options.thresholds,
                                     options.orientation_tolerance_deg);
          store.update([&](ReviewSession& s) {
            s.instances.insert(s.instances.end(), found.begin(), found.end());
            std::stable_sort(s.instances.begin(), s.instances.end(),
                             [](const auto& a, const auto& b) { return a.id < b.id; });
            s.find_image(rec.id)->status = ImageStatus::Ready;
          });
        } catch (const std::exception& e) {
          const std::string message = e.what();
          try {
            store.update([&](ReviewSession& s) {
              auto* img = s.find_image(rec.id);
              img->status = ImageStatus::Failed;
              img->error = message;
            });
          } catch (const std::exception&) {
            // The store keeps its last persisted state; nothing more to do.
          }
        }
        --run_ptr->remaining_;
      }
    });
  }
  return run;
}

Analysis::~Analysis() { wait(); }

void Analysis::wait() {
  for (auto& t : workers_) {
    if (t.joinable()) t.join();
  }
}

std::shared_ptr<SessionStore> analyze(const AnalyzeOptions& options) {
  auto run = Analysis::start(options);
  run->wait();
  return run->store();
}

}  // namespace crackinspect
