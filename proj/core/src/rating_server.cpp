#include <httplib.h>

#include "gnome/error.hpp"
#include "gnome/humaneval.hpp"

namespace gnome {

struct RatingServer::Impl {
  httplib::Server server;
};

namespace {

void reply(httplib::Response& res, const ServiceResponse& r) {
  res.status = r.status;
  res.set_content(r.body, r.content_type);
}

}  // namespace

RatingServer::RatingServer(RatingService& service, std::string static_dir) : impl_(std::make_unique<Impl>()) {
  auto& s = impl_->server;
  s.Get("/api/pairs/next", [&service](const httplib::Request& req, httplib::Response& res) {
    reply(res, service.next_pair(req.has_param("annotator") ? req.get_param_value("annotator") : ""));
  });
  s.Post("/api/ratings", [&service](const httplib::Request& req, httplib::Response& res) {
    reply(res, service.post_rating(req.body));
  });
  s.Get("/api/stats", [&service](const httplib::Request&, httplib::Response& res) { reply(res, service.stats()); });
  s.Get("/api/export",
        [&service](const httplib::Request&, httplib::Response& res) { reply(res, service.export_log()); });
  if (!static_dir.empty() && !s.set_mount_point("/", static_dir)) {
    throw Error("static directory not found: " + static_dir);
  }
}

RatingServer::~RatingServer() { stop(); }

int RatingServer::bind(const std::string& host, int port) {
  auto& s = impl_->server;
  const int bound = port == 0 ? s.bind_to_any_port(host) : (s.bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw Error("cannot bind " + host + ":" + std::to_string(port));
  return bound;
}

void RatingServer::listen() { impl_->server.listen_after_bind(); }

void RatingServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

void RatingServer::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

}  // namespace gnome
