#include "cli/commands.h"

#include <iostream>

int main(int argc, char** argv) {
  return ghzpur::cli::run_cli(argc, argv, std::cout, std::cerr);
}
