#include <iostream>
#include <string>
#include <vector>

#include "pcp/cli.h"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return pcp::run(args, std::cin, std::cout, std::cerr);
}
