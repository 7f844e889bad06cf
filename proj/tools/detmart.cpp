#include <iostream>

#include "detmart/cli.hpp"

int main(int argc, char** argv) {
  return detmart::cli::main(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
