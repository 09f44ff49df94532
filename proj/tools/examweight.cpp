#include <iostream>

#include "examweight/cli.hpp"

int main(int argc, char** argv) {
  return examweight::cli::run(argc, argv, std::cout, std::cerr);
}
