#pragma once

#include <spdlog/spdlog.h>

namespace argmap::log {

// Configures the process-wide logger on stderr. Verbosity comes from the
// ARGMAP_LOG environment variable (trace|debug|info|warn|error|off), default
// warn.
void init_from_env();

}  // namespace argmap::log
