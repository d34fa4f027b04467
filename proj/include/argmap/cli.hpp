#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace argmap::cli {

// Runs one subcommand. args[0] is the program name. Returns 0 on success,
// 1 on usage errors and 2 on data or integrity errors.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace argmap::cli
