#include <iostream>
#include <string>
#include <vector>

#include "vfrac/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return vfrac::run_cli(args, std::cout, std::cerr);
}
