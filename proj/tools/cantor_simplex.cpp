#include <iostream>
#include <string>
#include <vector>

#include "cantor_simplex/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return cantor_simplex::cli::run(args, std::cout, std::cerr);
}
