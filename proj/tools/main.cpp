#include <string>
#include <vector>

#include "compsplit/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return compsplit::run_cli(args);
}
