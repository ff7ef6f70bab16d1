#include <iostream>
#include <string>
#include <vector>

#include "cubelens/cli.h"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return cubelens::RunCommand(args, std::cout, std::cerr);
}
