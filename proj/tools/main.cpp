#include <iostream>
#include <string>
#include <vector>

#include "disparity/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return disparity::dispatch(args, std::cout, std::cerr);
}
