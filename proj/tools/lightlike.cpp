#include <iostream>

#include "lightlike/cli.hpp"

int main(int argc, char** argv) { return lightlike::cli::main(argc, argv, std::cout, std::cerr); }
