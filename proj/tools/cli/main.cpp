#include <iostream>
#include <string>
#include <vector>

#include "job.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return mathieu::cli::run(args, std::cout, std::cerr);
}
