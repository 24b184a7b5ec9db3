#include <string>
#include <vector>

#include "orgbin/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return orgbin::cli::run(args);
}
