#include <iostream>

#include "swtex_cli/commands.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return swtex::cli::run_cli(args, std::cout, std::cerr);
}
