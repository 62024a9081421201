#include <vector>

#include "horizon/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return horizon::run_cli(args);
}
