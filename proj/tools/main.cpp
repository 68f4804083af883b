#include <iostream>
#include <string>
#include <vector>

#include "obt/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return obt::run_cli(args, std::cout, std::cerr);
}
