#include <iostream>

#include "arena/cli/cli.hpp"
#include "arena/config/run_config.hpp"

int main(int argc, char** argv) {
  return arena::run_cli(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr,
                        arena::arena_environment());
}
