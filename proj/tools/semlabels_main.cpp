#include <iostream>
#include <string>
#include <vector>

#include "semlabels/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return semlabels::RunCli(args, std::cout, std::cerr);
}
