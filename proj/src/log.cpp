#include "argmap/log.hpp"

#include <cstdlib>
#include <mutex>

#include <spdlog/sinks/stdout_color_sinks.h>

namespace argmap::log {

void init_from_env() {
  static std::once_flag once;
  std::call_once(once, [] {
    auto logger = spdlog::stderr_color_mt("argmap");
    logger->set_pattern("[%l] %v");
    spdlog::set_default_logger(logger);
  });
  auto level = spdlog::level::warn;
  if (const char* env = std::getenv("ARGMAP_LOG"); env && *env) {
    level = spdlog::level::from_str(env);
  }
  spdlog::set_level(level);
}

}  // namespace argmap::log
