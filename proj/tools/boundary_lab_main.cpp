#include <vector>
#include <string>

#include "boundarylab/runner.hpp"

int main(int argc, char** argv) {
  return boundarylab::harness::run_cli(
      std::vector<std::string>(argv + 1, argv + argc));
}
