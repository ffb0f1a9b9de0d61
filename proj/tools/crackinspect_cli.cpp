#include <csignal>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <pthread.h>

#include <CLI11.hpp>

#include "crackinspect.h"

namespace {

struct Failure {
  ci_status status;
};

void check(ci_status status) {
  if (status != CI_OK) throw Failure{status};
}

void block_stop_signals(sigset_t* set) {
  sigemptyset(set);
  sigaddset(set, SIGINT);
  sigaddset(set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, set, nullptr);
}

// Stops the service on SIGINT/SIGTERM. The signals are blocked in every
// thread and collected by a dedicated sigwait thread.
class SignalStop {
 public:
  explicit SignalStop(ci_session* session) {
    block_stop_signals(&set_);
    waiter_ = std::thread([this, session] {
      int sig = 0;
      sigwait(&set_, &sig);
      if (sig == SIGINT || sig == SIGTERM) ci_session_stop(session);
    });
  }
  ~SignalStop() {
    pthread_kill(waiter_.native_handle(), SIGTERM);
    waiter_.join();
  }

 private:
  sigset_t set_;
  std::thread waiter_;
};

void announce(int port, void* host) {
  std::printf("review API listening on http://%s:%d/api/session\n", static_cast<const char*>(host),
              port);
  std::fflush(stdout);
}

struct AnalyzeArgs {
  std::string input_dir;
  std::string detector = "annotations";
  std::string annotations_dir;
  std::string command;
  double timeout = 300.0;
  int window = 31;
  double offset = 10.0;
  double lower = 60.0;
  double upper = 85.0;
  double tolerance = 10.0;
  unsigned workers = 1;
  std::optional<double> cm_per_px;
  std::vector<double> reference;
  std::vector<double> camera;
  std::string out_dir;
  std::optional<int> port;
  std::string host = "127.0.0.1";
};

void print_warnings(ci_session* session) {
  const char* w = ci_session_warnings(session);
  if (*w != '\0') std::fputs(w, stderr);
}

void finish_analysis(ci_session* session, const std::string& out_dir) {
  size_t rows = 0;
  check(ci_write_outputs(session, out_dir.c_str(), &rows));
  size_t images = 0;
  size_t instances = 0;
  check(ci_session_image_count(session, &images));
  check(ci_session_instance_count(session, &instances));
  std::printf("analyzed %zu images, %zu instances; report.csv has %zu rows in %s\n", images,
              instances, rows, out_dir.c_str());
  std::fflush(stdout);
}

int run_analyze(const AnalyzeArgs& a) {
  ci_config* cfg = nullptr;
  check(ci_config_new(&cfg));
  std::unique_ptr<ci_config, decltype(&ci_config_free)> guard(cfg, ci_config_free);

  const ci_detector kind = a.detector == "command"    ? CI_DETECTOR_COMMAND
                           : a.detector == "baseline" ? CI_DETECTOR_BASELINE
                                                      : CI_DETECTOR_ANNOTATIONS;
  check(ci_config_set_input_dir(cfg, a.input_dir.c_str()));
  check(ci_config_set_detector(cfg, kind));
  if (kind == CI_DETECTOR_ANNOTATIONS) {
    check(ci_config_set_annotations_dir(
        cfg, (a.annotations_dir.empty() ? a.input_dir : a.annotations_dir).c_str()));
  }
  if (kind == CI_DETECTOR_COMMAND) {
    check(ci_config_set_command(cfg, a.command.c_str(), a.timeout));
  }
  if (kind == CI_DETECTOR_BASELINE) check(ci_config_set_baseline(cfg, a.window, a.offset));
  check(ci_config_set_thresholds(cfg, a.lower, a.upper));
  check(ci_config_set_orientation_tolerance(cfg, a.tolerance));
  check(ci_config_set_workers(cfg, a.workers));
  if (a.cm_per_px) check(ci_config_set_scale_cm_per_px(cfg, *a.cm_per_px));
  if (a.reference.size() == 5) {
    const auto& r = a.reference;
    check(ci_config_set_scale_reference(cfg, r[0], r[1], r[2], r[3], r[4]));
  }
  if (a.camera.size() == 2) check(ci_config_set_scale_camera(cfg, a.camera[0], a.camera[1]));

  std::filesystem::create_directories(a.out_dir);
  const auto session_file = (std::filesystem::path(a.out_dir) / "session.json").string();
  check(ci_config_set_session_file(cfg, session_file.c_str()));

  ci_session* session = nullptr;
  if (!a.port) {
    check(ci_analyze(cfg, &session));
    std::unique_ptr<ci_session, decltype(&ci_session_close)> s(session, ci_session_close);
    print_warnings(session);
    finish_analysis(session, a.out_dir);
    return 0;
  }

  sigset_t blocked;
  block_stop_signals(&blocked);  // inherited by the analysis workers
  check(ci_analyze_start(cfg, &session));
  std::unique_ptr<ci_session, decltype(&ci_session_close)> s(session, ci_session_close);
  print_warnings(session);
  SignalStop stopper(session);
  std::thread finisher([session, &a] {
    try {
      check(ci_session_wait(session));
      finish_analysis(session, a.out_dir);
    } catch (const Failure& f) {
      std::fprintf(stderr, "error (%s): %s\n", ci_status_name(f.status), ci_last_error());
    }
  });
  const ci_status st = ci_serve(session, a.host.c_str(), *a.port, a.out_dir.c_str(), nullptr,
                                announce, const_cast<char*>(a.host.c_str()));
  finisher.join();
  check(st);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Crack inspection: triage, orientation, skeleton length, review and reports"};
  app.require_subcommand(1);
  app.set_version_flag("--version", ci_version());

  AnalyzeArgs an;
  auto* analyze = app.add_subcommand("analyze", "Detect, triage and measure every image in a directory");
  analyze->add_option("--input-dir", an.input_dir, "Directory of .jpg/.png images")->required()->check(CLI::ExistingDirectory);
  analyze->add_option("--detector", an.detector, "Detection backend")
      ->check(CLI::IsMember({"annotations", "command", "baseline"}))
      ->capture_default_str();
  analyze->add_option("--annotations-dir", an.annotations_dir,
                      "LabelMe JSON per image stem (default: the input directory)");
  analyze->add_option("--command", an.command, "Detector command; receives the image path as its last argument");
  analyze->add_option("--timeout", an.timeout, "Per-image command timeout in seconds")->capture_default_str();
  analyze->add_option("--window", an.window, "Baseline local-mean window (odd)")->capture_default_str();
  analyze->add_option("--offset", an.offset, "Baseline darkness offset")->capture_default_str();
  analyze->add_option("--lower", an.lower, "Lower triage threshold")->capture_default_str();
  analyze->add_option("--upper", an.upper, "Upper triage threshold")->capture_default_str();
  analyze->add_option("--tolerance", an.tolerance, "Orientation tolerance in degrees")->capture_default_str();
  analyze->add_option("--workers", an.workers, "Parallel images")->capture_default_str();
  auto* scale_px = analyze->add_option("--cm-per-px", an.cm_per_px, "Explicit scale");
  auto* scale_ref = analyze->add_option("--reference", an.reference,
                                        "Reference object: ax ay bx by length_cm")->expected(5);
  auto* scale_cam = analyze->add_option("--camera", an.camera,
                                        "Camera geometry: distance_cm focal_px")->expected(2);
  scale_px->excludes(scale_ref)->excludes(scale_cam);
  scale_ref->excludes(scale_cam);
  analyze->add_option("--out-dir", an.out_dir, "Output directory")->required();
  analyze->add_option("--port", an.port, "Serve the review API while analyzing");
  analyze->add_option("--host", an.host, "Bind address for --port")->capture_default_str();
  analyze->callback([&] {
    if (an.detector == "command" && an.command.empty()) {
      throw CLI::ValidationError("--command", "required with --detector command");
    }
  });

  std::string pred, gt, eval_out;
  auto* evaluate = app.add_subcommand("evaluate", "Per-image IoU and box statistics against ground truth");
  evaluate->add_option("--pred", pred, "Predictions: annotation directory or session file")->required()->check(CLI::ExistingPath);
  evaluate->add_option("--gt", gt, "Ground-truth annotation directory")->required()->check(CLI::ExistingDirectory);
  evaluate->add_option("--out", eval_out, "Output CSV")->required();

  std::string report_session, report_dir;
  auto* report = app.add_subcommand("report", "Regenerate report.csv, masks and overlays from a session");
  report->add_option("session", report_session, "Session file")->required()->check(CLI::ExistingFile);
  report->add_option("--out-dir", report_dir, "Output directory (default: next to the session)");

  std::string serve_session, serve_host = "127.0.0.1", serve_dir, ui_dir;
  int serve_port = 8080;
  auto* serve = app.add_subcommand("serve", "Serve the review API for a session");
  serve->add_option("session", serve_session, "Session file")->required()->check(CLI::ExistingFile);
  serve->add_option("--port", serve_port, "Port (0 picks a free one)")->capture_default_str();
  serve->add_option("--host", serve_host, "Bind address")->capture_default_str();
  serve->add_option("--out-dir", serve_dir, "Where POST /api/report writes report.csv");
  serve->add_option("--ui-dir", ui_dir, "Static UI assets mounted at /")->check(CLI::ExistingDirectory);

  std::string decide_session, decide_instance, decide_verdict;
  auto* decide = app.add_subcommand("decide", "Accept or reject one instance");
  decide->add_option("session", decide_session, "Session file")->required()->check(CLI::ExistingFile);
  decide->add_option("instance", decide_instance, "Instance id")->required();
  decide->add_option("verdict", decide_verdict, "accept or reject")
      ->required()
      ->check(CLI::IsMember({"accept", "reject"}));

  std::string retriage_session;
  double new_lower = 60.0;
  double new_upper = 85.0;
  auto* retriage = app.add_subcommand("retriage", "Re-bucket every instance with new thresholds");
  retriage->add_option("session", retriage_session, "Session file")->required()->check(CLI::ExistingFile);
  retriage->add_option("--lower", new_lower, "Lower threshold")->required();
  retriage->add_option("--upper", new_upper, "Upper threshold")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (analyze->parsed()) return run_analyze(an);

    if (evaluate->parsed()) {
      size_t images = 0;
      check(ci_evaluate(pred.c_str(), gt.c_str(), eval_out.c_str(), &images));
      std::printf("evaluated %zu images into %s\n", images, eval_out.c_str());
      return 0;
    }

    ci_session* session = nullptr;
    const std::string& path = report->parsed()   ? report_session
                              : serve->parsed()  ? serve_session
                              : decide->parsed() ? decide_session
                                                 : retriage_session;
    check(ci_session_open(path.c_str(), &session));
    std::unique_ptr<ci_session, decltype(&ci_session_close)> s(session, ci_session_close);

    if (report->parsed()) {
      if (report_dir.empty()) report_dir = std::filesystem::path(path).parent_path().string();
      if (report_dir.empty()) report_dir = ".";
      size_t rows = 0;
      check(ci_write_outputs(session, report_dir.c_str(), &rows));
      std::printf("report.csv has %zu rows in %s\n", rows, report_dir.c_str());
    } else if (serve->parsed()) {
      SignalStop stopper(session);
      check(ci_serve(session, serve_host.c_str(), serve_port,
                     serve_dir.empty() ? nullptr : serve_dir.c_str(),
                     ui_dir.empty() ? nullptr : ui_dir.c_str(), announce,
                     const_cast<char*>(serve_host.c_str())));
    } else if (decide->parsed()) {
      check(ci_record_decision(session, decide_instance.c_str(),
                               decide_verdict == "accept" ? CI_VERDICT_ACCEPT : CI_VERDICT_REJECT));
    } else {
      check(ci_retriage(session, new_lower, new_upper));
    }
    return 0;
  } catch (const Failure& f) {
    std::fprintf(stderr, "error (%s): %s\n", ci_status_name(f.status), ci_last_error());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
