#include "argmap/annotation_http.hpp"

#include <httplib.h>
#include <spdlog/spdlog.h>

#include "argmap/error.hpp"

namespace argmap {
namespace {

void reply_json(httplib::Response& res, int status, const nlohmann::json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void reply_error(httplib::Response& res, int status, const std::string& message) {
  reply_json(res, status, {{"error", message}});
}

}  // namespace

AnnotationServer::AnnotationServer(AnnotationService& service, std::optional<std::filesystem::path> ui_dir)
    : service_(service), server_(std::make_unique<httplib::Server>()) {
  auto& srv = *server_;

  srv.Get("/api/session/:assessor/next", [this](const httplib::Request& req, httplib::Response& res) {
    try {
      reply_json(res, 200, service_.next_item(req.path_params.at("assessor")).to_json());
    } catch (const PreconditionError& e) {
      reply_error(res, 400, e.what());
    }
  });

  srv.Get("/api/progress/:assessor", [this](const httplib::Request& req, httplib::Response& res) {
    try {
      reply_json(res, 200, service_.progress(req.path_params.at("assessor")).to_json());
    } catch (const PreconditionError& e) {
      reply_error(res, 400, e.what());
    }
  });

  srv.Post("/api/judgment", [this](const httplib::Request& req, httplib::Response& res) {
    nlohmann::json body;
    try {
      body = nlohmann::json::parse(req.body);
    } catch (const nlohmann::json::parse_error&) {
      return reply_error(res, 400, "body is not JSON");
    }
    if (!body.is_object() || !body.contains("assessor") || !body["assessor"].is_string() ||
        !body.contains("unit_id") || !body["unit_id"].is_string() || !body.contains("topic_id") ||
        !body["topic_id"].is_string() || !body.contains("about") || !body["about"].is_boolean()) {
      return reply_error(res, 400, "expected {\"assessor\",\"unit_id\",\"topic_id\",\"about\"}");
    }
    try {
      const Judgment j = service_.submit_judgment(body["assessor"].get<std::string>(),
                                                  body["unit_id"].get<std::string>(),
                                                  body["topic_id"].get<std::string>(), body["about"].get<bool>());
      reply_json(res, 200, {{"status", "ok"}, {"timestamp", j.timestamp}});
    } catch (const PreconditionError& e) {
      reply_error(res, 422, e.what());
    } catch (const RetryableError& e) {
      spdlog::error("{}", e.what());
      res.set_header("Retry-After", "1");
      reply_error(res, 503, e.what());
    }
  });

  srv.Get("/api/export", [this](const httplib::Request&, httplib::Response& res) {
    res.status = 200;
    res.set_content(service_.export_judgments(), "application/x-ndjson");
  });

  if (ui_dir) {
    if (!srv.set_mount_point("/", ui_dir->string())) {
      spdlog::warn("UI directory {} not found; serving the API only", ui_dir->string());
    }
  }
}

AnnotationServer::~AnnotationServer() { stop(); }

int AnnotationServer::bind(const std::string& host, int port) {
  if (port == 0) return server_->bind_to_any_port(host);
  return server_->bind_to_port(host, port) ? port : -1;
}

bool AnnotationServer::listen() { return server_->listen_after_bind(); }

void AnnotationServer::stop() {
  if (server_ && server_->is_running()) server_->stop();
}

void AnnotationServer::wait_until_ready() const { server_->wait_until_ready(); }

}  // namespace argmap
