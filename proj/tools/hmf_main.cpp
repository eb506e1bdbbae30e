#include <iostream>

#include "hmf/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return hmf::run_command(args, std::cout, std::cerr);
}
