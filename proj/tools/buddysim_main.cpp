#include <iostream>
#include <string>
#include <vector>

#include "buddysim/config.h"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return buddysim::cli_main(args, std::cout, std::cerr);
}
