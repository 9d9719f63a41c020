#include <iostream>

#include "matmech_cli.hpp"

int main(int argc, char** argv) { return matmech::cli::run(argc, argv, std::cout, std::cerr); }
