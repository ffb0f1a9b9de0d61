#pragma once

#include <atomic>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "crackinspect/review_session.hpp"

namespace crackinspect {

/// Owns the authoritative session and its file. Mutations run one at a time
/// and are persisted before update() returns; snapshot() copies under the
/// same lock, so readers never see a half-applied change.
class SessionStore {
 public:
  /// Persists `initial` to `file` right away.
  SessionStore(ReviewSession initial, std::filesystem::path file);

  static std::shared_ptr<SessionStore> open(const std::filesystem::path& file);

  ReviewSession snapshot() const;

  /// Applies `mutation` to a copy; on success the copy is persisted and
  /// becomes current. If nothing changed, neither the file nor updated_at is
  /// touched. Exceptions leave the store unchanged.
  void update(const std::function<void(ReviewSession&)>& mutation);

  const std::filesystem::path& file() const noexcept { return file_; }

 private:
  mutable std::mutex mutex_;
  ReviewSession session_;
  std::string serialized_;  // last persisted text
  std::filesystem::path file_;
};

// Pure session transitions -----------------------------------------------------

/// Stores `verdict` on an instance. NotFound for unknown ids; InvalidState
/// when the image is not Ready or the instance sits in the Rejected bucket.
/// Re-posting the current verdict is a no-op.
void record_decision(ReviewSession& session, std::string_view instance_id, Decision verdict,
                     const std::string& timestamp);

/// Re-buckets every instance. Decisions survive while an instance stays
/// reviewable and are cleared when it drops to Rejected.
void retriage(ReviewSession& session, const TriageThresholds& thresholds);

// Analysis ---------------------------------------------------------------------

struct AnalyzeOptions {
  std::filesystem::path input_dir;
  DetectorBackend detector;
  TriageThresholds thresholds;
  double orientation_tolerance_deg = kDefaultOrientationToleranceDeg;
  std::optional<ScaleModel> scale;
  unsigned workers = 1;
  std::filesystem::path session_file;
};

/// Runs the detector on one image and fills in bucket, orientation and
/// skeleton length for each instance.
std::vector<CrackInstance> analyze_image(const ImageRecord& image, const DetectorBackend& detector,
                                         const TriageThresholds& thresholds,
                                         double orientation_tolerance_deg);

/// A running analysis. The store is usable (and persisted) while images are
/// still being processed.
class Analysis {
 public:
  static std::unique_ptr<Analysis> start(const AnalyzeOptions& options);

  ~Analysis();
  Analysis(const Analysis&) = delete;
  Analysis& operator=(const Analysis&) = delete;

  std::shared_ptr<SessionStore> store() const { return store_; }
  /// Blocks until every image is Ready or Failed.
  void wait();
  bool done() const noexcept { return remaining_.load() == 0; }

  /// Scan warnings (unreadable files that were skipped).
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }

 private:
  Analysis() = default;

  std::shared_ptr<SessionStore> store_;
  std::vector<std::jthread> workers_;
  std::atomic<std::size_t> remaining_{0};
  std::vector<std::string> warnings_;
};

/// Blocking convenience over Analysis::start + wait.
std::shared_ptr<SessionStore> analyze(const AnalyzeOptions& options);

// Review service ---------------------------------------------------------------

struct ServiceOptions {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::filesystem::path out_dir;  // report.csv destination; defaults to the session's directory
  std::filesystem::path ui_dir;   // optional static assets mounted at "/"
};

/// HTTP review API over a SessionStore.
class ReviewService {
 public:
  ReviewService(std::shared_ptr<SessionStore> store, ServiceOptions options);
  ~ReviewService();
  ReviewService(const ReviewService&) = delete;
  ReviewService& operator=(const ReviewService&) = delete;

  /// Binds the listening socket; PortBusy when the port is taken. Port 0
  /// picks a free port.
  int bind();
  /// Serves until stop() is called. Requires bind().
  void run();
  void stop();
  int port() const noexcept { return bound_port_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  int bound_port_ = 0;
};

}  // namespace crackinspect
