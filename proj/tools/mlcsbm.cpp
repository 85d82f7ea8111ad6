#include <iostream>
#include <string>
#include <vector>

#include "mlcsbm/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return mlcsbm::dispatch(args, std::cerr);
}
