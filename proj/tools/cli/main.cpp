#include <iostream>
#include <string>
#include <vector>

#include "hmrgeom_cli/cli.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv + 1, argv + argc);
  return hmrgeom::cli::run(args, std::cout, std::cerr).exit_code;
}
