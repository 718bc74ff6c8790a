#include <iostream>
#include <string>
#include <vector>

#include "nitsche/cli_io.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv, argv + argc);
  return nitsche::run_cli(args, std::cout, std::cerr);
}
