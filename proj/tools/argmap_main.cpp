#include <iostream>
#include <string>
#include <vector>

#include "argmap/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return argmap::cli::run(args, std::cout, std::cerr);
}
