#include <iostream>

#include "floatscope/cli.hpp"

int main(int argc, char **argv) {
  return floatscope::run_cli(argc, argv, std::cout, std::cerr);
}
