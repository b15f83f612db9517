#include <iostream>

#include "lsmr/cli.hpp"

int main(int argc, char** argv) { return lsmr::cli::main(argc, argv, std::cout, std::cerr); }
