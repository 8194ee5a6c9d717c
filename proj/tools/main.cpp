#include <string>
#include <vector>

#include "walshgraph/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return walshgraph::cli::run(args);
}
