#include <iostream>

#include "atlasburst/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return atlasburst::cli::run(args, std::cout, std::cerr);
}
