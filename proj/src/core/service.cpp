#include <sys/socket.h>

#include <httplib.h>

#include <atomic>
#include <thread>

#include <json.hpp>

#include "crackinspect/error.hpp"
#include "crackinspect/image_io.hpp"
#include "crackinspect/report.hpp"
#include "crackinspect/session.hpp"

namespace crackinspect {

using json = nlohmann::json;

namespace {

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::Parse: return 400;
    case ErrorCode::NotFound: return 404;
    case ErrorCode::InvalidState: return 409;
    default: return 500;
  }
}

void send_json(httplib::Response& res, const json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, ErrorCode code, const std::string& message) {
  send_json(res, {{"error", error_code_name(code)}, {"message", message}}, http_status(code));
}

json bucket_counts(const ReviewSession& s, std::string_view image_id) {
  std::size_t counts[3] = {0, 0, 0};
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  for (const auto& inst : s.instances) {
    if (!image_id.empty() && inst.image_id != image_id) continue;
    ++counts[static_cast<int>(inst.bucket)];
    if (inst.decision == Decision::Accepted) ++accepted;
    if (inst.decision == Decision::RejectedByOperator) ++rejected;
  }
  return {{"confident", counts[static_cast<int>(TriageBucket::Confident)]},
          {"possible", counts[static_cast<int>(TriageBucket::Possible)]},
          {"rejected", counts[static_cast<int>(TriageBucket::Rejected)]},
          {"accepted", accepted},
          {"rejected_by_operator", rejected}};
}

json image_json(const ReviewSession& s, const ImageEntry& image) {
  const auto& r = image.record;
  return {{"id", r.id},
          {"filename", r.filename()},
          {"width", r.width},
          {"height", r.height},
          {"captured_at", r.captured_at ? json(*r.captured_at) : json(nullptr)},
          {"status", to_string(image.status)},
          {"error", image.error ? json(*image.error) : json(nullptr)},
          {"counts", bucket_counts(s, r.id)}};
}

json instance_json(const CrackInstance& inst) {
  return {{"id", inst.id},
          {"image_id", inst.image_id},
          {"label", inst.label},
          {"score", inst.score},
          {"bucket", to_string(inst.bucket)},
          {"orientation", inst.orientation ? json(to_string(*inst.orientation)) : json(nullptr)},
          {"decision", to_string(inst.decision)},
          {"decided_at", inst.decided_at ? json(*inst.decided_at) : json(nullptr)},
          {"length_px", inst.length_px}};
}

json session_json(const ReviewSession& s) {
  std::size_t ready = 0;
  std::size_t failed = 0;
  for (const auto& img : s.images) {
    if (img.status == ImageStatus::Ready) ++ready;
    if (img.status == ImageStatus::Failed) ++failed;
  }
  auto counts = bucket_counts(s, {});
  counts["images"] = s.images.size();
  counts["ready"] = ready;
  counts["failed"] = failed;
  counts["instances"] = s.instances.size();
  return {{"session_id", s.session_id},
          {"input_dir", s.input_dir},
          {"detector", to_string(s.detector.kind)},
          {"thresholds", {{"lower", s.thresholds.lower()}, {"upper", s.thresholds.upper()}}},
          {"status", s.ready() ? "ready" : "analyzing"},
          {"counts", counts},
          {"created_at", s.created_at},
          {"updated_at", s.updated_at}};
}

json parse_body(const httplib::Request& req) {
  auto body = json::parse(req.body, nullptr, false);
  if (body.is_discarded() || !body.is_object()) {
    throw Error(ErrorCode::InvalidArgument, "request body must be a JSON object");
  }
  return body;
}

double number_field(const json& body, const char* key) {
  const auto it = body.find(key);
  if (it == body.end() || !it->is_number()) {
    throw Error(ErrorCode::InvalidArgument, std::string("'") + key + "' must be a number");
  }
  return it->get<double>();
}

}  // namespace

struct ReviewService::Impl {
  std::shared_ptr<SessionStore> store;
  ServiceOptions options;
  httplib::Server server;
  std::atomic<bool> stop_requested{false};
  std::atomic<bool> entered{false};
  std::atomic<bool> exited{false};

  std::filesystem::path report_path() const {
    const auto dir = options.out_dir.empty() ? store->file().parent_path() : options.out_dir;
    return dir / "report.csv";
  }

  template <typename Handler>
  httplib::Server::Handler guarded(Handler handler) {
    return [handler](const httplib::Request& req, httplib::Response& res) {
      try {
        handler(req, res);
      } catch (const Error& e) {
        send_error(res, e.code(), e.what());
      } catch (const std::exception& e) {
        send_error(res, ErrorCode::Internal, e.what());
      }
    };
  }

  void routes() {
    server.Get("/api/session", guarded([this](const httplib::Request&, httplib::Response& res) {
      send_json(res, session_json(store->snapshot()));
    }));

    server.Get("/api/images", guarded([this](const httplib::Request&, httplib::Response& res) {
      const auto s = store->snapshot();
      json out = json::array();
      for (const auto& img : s.images) out.push_back(image_json(s, img));
      send_json(res, out);
    }));

    server.Get(R"(/api/images/([^/]+)/instances)",
               guarded([this](const httplib::Request& req, httplib::Response& res) {
                 const auto s = store->snapshot();
                 const std::string id = req.matches[1];
                 if (s.find_image(id) == nullptr) {
                   throw Error(ErrorCode::NotFound, "no image '" + id + "'");
                 }
                 json out = json::array();
                 for (const auto& inst : s.instances) {
                   if (inst.image_id == id) out.push_back(instance_json(inst));
                 }
                 send_json(res, out);
               }));

    server.Get(R"(/api/images/([^/]+)/(overlay|mask)\.png)",
               guarded([this](const httplib::Request& req, httplib::Response& res) {
                 const auto s = store->snapshot();
                 const std::string id = req.matches[1];
                 const auto* image = s.find_image(id);
                 if (image == nullptr) throw Error(ErrorCode::NotFound, "no image '" + id + "'");
                 const auto png =
                     req.matches[2] == "overlay"
                         ? render_image_overlay(s, *image, std::nullopt)
                         : encode_mask_png(image_union_mask(s, *image, std::nullopt));
                 res.set_content(reinterpret_cast<const char*>(png.data()), png.size(),
                                 "image/png");
               }));

    server.Get(R"(/api/instances/([^/]+))",
               guarded([this](const httplib::Request& req, httplib::Response& res) {
                 const auto s = store->snapshot();
                 const std::string id = req.matches[1];
                 const auto* inst = s.find_instance(id);
                 if (inst == nullptr) throw Error(ErrorCode::NotFound, "no instance '" + id + "'");
                 send_json(res, instance_json(*inst));
               }));

    server.Post(R"(/api/instances/([^/]+)/decision)",
                guarded([this](const httplib::Request& req, httplib::Response& res) {
                  const auto body = parse_body(req);
                  const auto it = body.find("verdict");
                  Decision verdict = Decision::Pending;
                  if (it != body.end() && *it == "accept") verdict = Decision::Accepted;
                  if (it != body.end() && *it == "reject") verdict = Decision::RejectedByOperator;
                  if (verdict == Decision::Pending) {
                    throw Error(ErrorCode::InvalidArgument,
                                "'verdict' must be \"accept\" or \"reject\"");
                  }
                  const std::string id = req.matches[1];
                  const auto now = utc_timestamp();
                  store->update(
                      [&](ReviewSession& s) { record_decision(s, id, verdict, now); });
                  send_json(res, instance_json(*store->snapshot().find_instance(id)));
                }));

    server.Post("/api/session/thresholds",
                guarded([this](const httplib::Request& req, httplib::Response& res) {
                  const auto body = parse_body(req);
                  const TriageThresholds t(number_field(body, "lower"),
                                           number_field(body, "upper"));
                  store->update([&](ReviewSession& s) { retriage(s, t); });
                  send_json(res, session_json(store->snapshot()));
                }));

    server.Post("/api/report", guarded([this](const httplib::Request&, httplib::Response& res) {
      const auto path = report_path();
      const auto rows = write_report_csv(store->snapshot(), path);
      send_json(res, {{"path", path.string()}, {"rows", rows}});
    }));

    server.Get("/api/report.csv", guarded([this](const httplib::Request&, httplib::Response& res) {
      res.set_content(render_report_csv(build_report(store->snapshot())), "text/csv");
    }));

    if (!options.ui_dir.empty() && !server.set_mount_point("/", options.ui_dir.string())) {
      throw Error(ErrorCode::Io, "cannot serve UI assets from " + options.ui_dir.string());
    }
  }
};

ReviewService::ReviewService(std::shared_ptr<SessionStore> store, ServiceOptions options)
    : impl_(std::make_unique<Impl>()) {
  impl_->store = std::move(store);
  impl_->options = std::move(options);
  // SO_REUSEPORT (httplib's default) would let a second server share the port.
  impl_->server.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });
  impl_->routes();
}

ReviewService::~ReviewService() { stop(); }

int ReviewService::bind() {
  const auto& host = impl_->options.host;
  const int port = impl_->options.port;
  if (port == 0) {
    bound_port_ = impl_->server.bind_to_any_port(host);
    if (bound_port_ <= 0) throw Error(ErrorCode::PortBusy, "cannot bind " + host);
  } else {
    if (!impl_->server.bind_to_port(host, port)) {
      throw Error(ErrorCode::PortBusy, host + ":" + std::to_string(port) + " is not available");
    }
    bound_port_ = port;
  }
  return bound_port_;
}

void ReviewService::run() {
  if (bound_port_ == 0) throw Error(ErrorCode::InvalidState, "service is not bound");
  impl_->entered = true;
  if (!impl_->stop_requested) impl_->server.listen_after_bind();
  impl_->exited = true;
}

void ReviewService::stop() {
  if (!impl_) return;
  impl_->stop_requested = true;
  if (!impl_->entered || impl_->exited) return;
  // run() may not have reached the accept loop yet; stop() is a no-op until it has.
  while (!impl_->server.is_running() && !impl_->exited) std::this_thread::yield();
  impl_->server.stop();
}

}  // namespace crackinspect
