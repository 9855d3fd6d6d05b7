#include <iostream>

#include "pitdep/cli.hpp"

int main(int argc, char** argv) {
  return pitdep::cli::main_entry(argc, argv, std::cout, std::cerr);
}
