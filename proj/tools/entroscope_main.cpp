#include <iostream>

#include "entroscope/cli.hpp"

int main(int argc, char** argv) {
  return entroscope::cli::run(argc, argv, std::cout, std::cerr);
}
