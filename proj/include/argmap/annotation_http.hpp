#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "argmap/annotation.hpp"

namespace httplib {
class Server;
}

namespace argmap {

// HTTP+JSON front end of an AnnotationService:
//   GET  /api/session/{assessor}/next
//   POST /api/judgment            {"assessor","unit_id","topic_id","about"}
//   GET  /api/progress/{assessor}
//   GET  /api/export
// Static UI assets, if a directory is given, are served at "/".
class AnnotationServer {
 public:
  AnnotationServer(AnnotationService& service, std::optional<std::filesystem::path> ui_dir = std::nullopt);
  ~AnnotationServer();

  // Binds; port 0 picks a free port. Returns the bound port or -1.
  int bind(const std::string& host, int port);
  // Blocks until stop().
  bool listen();
  void stop();
  void wait_until_ready() const;

 private:
  AnnotationService& service_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace argmap
