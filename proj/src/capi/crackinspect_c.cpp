#include "crackinspect.h"

#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "crackinspect/error.hpp"
#include "crackinspect/evaluate.hpp"
#include "crackinspect/image_io.hpp"
#include "crackinspect/metrics.hpp"
#include "crackinspect/report.hpp"
#include "crackinspect/session.hpp"

using namespace crackinspect;

struct ci_config {
  AnalyzeOptions options;
};

struct ci_session {
  std::unique_ptr<Analysis> analysis;
  std::shared_ptr<SessionStore> store;
  std::string warnings;
  std::mutex service_mutex;
  ReviewService* service = nullptr;
  bool stop_requested = false;
};

namespace {

thread_local std::string last_error;

ci_status fail(ci_status status, const std::string& message) {
  last_error = message;
  return status;
}

template <typename F>
ci_status guarded(F&& body) {
  try {
    body();
    last_error.clear();
    return CI_OK;
  } catch (const Error& e) {
    return fail(static_cast<ci_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(CI_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(CI_INTERNAL, e.what());
  }
}

void require(bool condition, const char* what) {
  if (!condition) throw Error(ErrorCode::InvalidArgument, what);
}

std::string join_warnings(const std::vector<std::string>& warnings) {
  std::string out;
  for (const auto& w : warnings) out += w + "\n";
  return out;
}

}  // namespace

extern "C" {

const char* ci_last_error(void) { return last_error.c_str(); }

const char* ci_status_name(ci_status status) {
  if (status == CI_OK) return "ok";
  if (status < CI_INVALID_ARGUMENT || status > CI_INTERNAL) return "unknown";
  return error_code_name(static_cast<ErrorCode>(status)).data();
}

const char* ci_version(void) { return CRACKINSPECT_VERSION; }

ci_status ci_config_new(ci_config** out) {
  return guarded([&] {
    require(out != nullptr, "out is null");
    *out = new ci_config();
  });
}

void ci_config_free(ci_config* config) { delete config; }

ci_status ci_config_set_input_dir(ci_config* config, const char* dir) {
  return guarded([&] {
    require(config && dir, "config and dir are required");
    config->options.input_dir = dir;
  });
}

ci_status ci_config_set_session_file(ci_config* config, const char* path) {
  return guarded([&] {
    require(config && path, "config and path are required");
    config->options.session_file = path;
  });
}

ci_status ci_config_set_detector(ci_config* config, ci_detector kind) {
  return guarded([&] {
    require(config != nullptr, "config is null");
    switch (kind) {
      case CI_DETECTOR_ANNOTATIONS: config->options.detector.kind = DetectorKind::AnnotationImport; break;
      case CI_DETECTOR_COMMAND: config->options.detector.kind = DetectorKind::ExternalCommand; break;
      case CI_DETECTOR_BASELINE: config->options.detector.kind = DetectorKind::Baseline; break;
      default: throw Error(ErrorCode::InvalidArgument, "unknown detector kind");
    }
  });
}

ci_status ci_config_set_annotations_dir(ci_config* config, const char* dir) {
  return guarded([&] {
    require(config && dir, "config and dir are required");
    config->options.detector.annotations_dir = dir;
  });
}

ci_status ci_config_set_command(ci_config* config, const char* command, double timeout_s) {
  return guarded([&] {
    require(config && command, "config and command are required");
    require(timeout_s > 0.0, "timeout must be positive");
    config->options.detector.command.command = command;
    config->options.detector.command.timeout =
        std::chrono::milliseconds(static_cast<long long>(timeout_s * 1000.0));
  });
}

ci_status ci_config_set_baseline(ci_config* config, int window, double offset) {
  return guarded([&] {
    require(config != nullptr, "config is null");
    require(window >= 3 && window % 2 == 1, "window must be odd and at least 3");
    config->options.detector.baseline.window = window;
    config->options.detector.baseline.offset = offset;
  });
}

ci_status ci_config_set_thresholds(ci_config* config, double lower, double upper) {
  return guarded([&] {
    require(config != nullptr, "config is null");
    config->options.thresholds = TriageThresholds(lower, upper);
  });
}

ci_status ci_config_set_orientation_tolerance(ci_config* config, double degrees) {
  return guarded([&] {
    require(config != nullptr, "config is null");
    require(degrees >= 0.0 && degrees <= 45.0, "tolerance must be within [0, 45] degrees");
    config->options.orientation_tolerance_deg = degrees;
  });
}

ci_status ci_config_set_workers(ci_config* config, unsigned workers) {
  return guarded([&] {
    require(config != nullptr, "config is null");
    require(workers >= 1, "workers must be at least 1");
    config->options.workers = workers;
  });
}

ci_status ci_config_set_scale_cm_per_px(ci_config* config, double cm_per_px) {
  return guarded([&] {
    require(config != nullptr, "config is null");
    ScaleModel model = ExplicitCmPerPx{cm_per_px};
    resolve_scale(model);
    config->options.scale = model;
  });
}

ci_status ci_config_set_scale_reference(ci_config* config, double ax, double ay, double bx,
                                        double by, double known_length_cm) {
  return guarded([&] {
    require(config != nullptr, "config is null");
    ScaleModel model = ReferenceObject{{ax, ay}, {bx, by}, known_length_cm};
    resolve_scale(model);
    config->options.scale = model;
  });
}

ci_status ci_config_set_scale_camera(ci_config* config, double distance_cm, double focal_px) {
  return guarded([&] {
    require(config != nullptr, "config is null");
    ScaleModel model = CameraGeometry{distance_cm, focal_px};
    resolve_scale(model);
    config->options.scale = model;
  });
}

ci_status ci_analyze_start(const ci_config* config, ci_session** out) {
  return guarded([&] {
    require(config && out, "config and out are required");
    require(!config->options.input_dir.empty(), "input directory is not set");
    require(!config->options.session_file.empty(), "session file is not set");
    auto s = std::make_unique<ci_session>();
    s->analysis = Analysis::start(config->options);
    s->store = s->analysis->store();
    s->warnings = join_warnings(s->analysis->warnings());
    *out = s.release();
  });
}

ci_status ci_session_wait(ci_session* session) {
  return guarded([&] {
    require(session != nullptr, "session is null");
    if (session->analysis) session->analysis->wait();
  });
}

ci_status ci_analyze(const ci_config* config, ci_session** out) {
  const ci_status st = ci_analyze_start(config, out);
  if (st != CI_OK) return st;
  return ci_session_wait(*out);
}

ci_status ci_session_open(const char* path, ci_session** out) {
  return guarded([&] {
    require(path && out, "path and out are required");
    auto s = std::make_unique<ci_session>();
    s->store = SessionStore::open(path);
    *out = s.release();
  });
}

void ci_session_close(ci_session* session) { delete session; }

ci_status ci_session_image_count(ci_session* session, size_t* out) {
  return guarded([&] {
    require(session && out, "session and out are required");
    *out = session->store->snapshot().images.size();
  });
}

ci_status ci_session_instance_count(ci_session* session, size_t* out) {
  return guarded([&] {
    require(session && out, "session and out are required");
    *out = session->store->snapshot().instances.size();
  });
}

const char* ci_session_warnings(ci_session* session) {
  return session ? session->warnings.c_str() : "";
}

ci_status ci_record_decision(ci_session* session, const char* instance_id, ci_verdict verdict) {
  return guarded([&] {
    require(session && instance_id, "session and instance id are required");
    Decision d = Decision::Pending;
    if (verdict == CI_VERDICT_ACCEPT) d = Decision::Accepted;
    if (verdict == CI_VERDICT_REJECT) d = Decision::RejectedByOperator;
    require(d != Decision::Pending, "verdict must be accept or reject");
    const auto now = utc_timestamp();
    session->store->update([&](ReviewSession& s) { record_decision(s, instance_id, d, now); });
  });
}

ci_status ci_retriage(ci_session* session, double lower, double upper) {
  return guarded([&] {
    require(session != nullptr, "session is null");
    const TriageThresholds t(lower, upper);
    session->store->update([&](ReviewSession& s) { retriage(s, t); });
  });
}

ci_status ci_write_outputs(ci_session* session, const char* out_dir, size_t* rows) {
  return guarded([&] {
    require(session && out_dir, "session and out_dir are required");
    const auto n = write_outputs(session->store->snapshot(), out_dir);
    if (rows) *rows = n;
  });
}

ci_status ci_write_report(ci_session* session, const char* csv_path, size_t* rows) {
  return guarded([&] {
    require(session && csv_path, "session and csv_path are required");
    const auto n = write_report_csv(session->store->snapshot(), csv_path);
    if (rows) *rows = n;
  });
}

ci_status ci_serve(ci_session* session, const char* host, int port, const char* out_dir,
                   const char* ui_dir, ci_bound_fn on_bound, void* user) {
  return guarded([&] {
    require(session != nullptr, "session is null");
    require(port >= 0 && port <= 65535, "port must be within [0, 65535]");
    ServiceOptions options;
    if (host) options.host = host;
    options.port = port;
    if (out_dir) options.out_dir = out_dir;
    if (ui_dir) options.ui_dir = ui_dir;
    ReviewService service(session->store, options);
    const int bound = service.bind();
    {
      std::lock_guard lock(session->service_mutex);
      if (session->stop_requested) return;
      session->service = &service;
    }
    if (on_bound) on_bound(bound, user);
    service.run();
    std::lock_guard lock(session->service_mutex);
    session->service = nullptr;
  });
}

ci_status ci_session_stop(ci_session* session) {
  return guarded([&] {
    require(session != nullptr, "session is null");
    std::lock_guard lock(session->service_mutex);
    session->stop_requested = true;
    if (session->service) session->service->stop();
  });
}

ci_status ci_evaluate(const char* predictions, const char* gt_dir, const char* out_csv,
                      size_t* images) {
  return guarded([&] {
    require(predictions && gt_dir && out_csv, "predictions, gt_dir and out_csv are required");
    const auto records = evaluate_predictions(predictions, gt_dir);
    write_file_atomic(out_csv, render_evaluation_csv(records));
    if (images) *images = records.size();
  });
}

ci_status ci_box_stats_compute(const double* values, size_t n, ci_box_stats* out,
                               double* outliers) {
  return guarded([&] {
    require(values && out && n > 0, "values, out and a non-empty list are required");
    const auto b = box_stats(std::span<const double>(values, n));
    *out = {b.lower_adjacent, b.lower_quartile, b.median, b.upper_quartile, b.upper_adjacent,
            b.outliers.size()};
    if (outliers) std::copy(b.outliers.begin(), b.outliers.end(), outliers);
  });
}

ci_status ci_length_error_pct(double estimate_cm, double ground_truth_cm, double* out) {
  return guarded([&] {
    require(out != nullptr, "out is null");
    *out = length_error_pct(estimate_cm, ground_truth_cm);
  });
}

}  // extern "C"
