#include <iostream>

#include "ktraffic/cli.hpp"

int main(int argc, char** argv) {
  return ktraffic::cli::run_cli(argc, argv, std::cout, std::cerr);
}
