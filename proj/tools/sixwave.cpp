#include <string>
#include <vector>

#include "sixwave/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return sixwave::run(args);
}
