#include <iostream>

#include "modquad/cli.hpp"

int main(int argc, char** argv) { return modquad::cli_main(argc, argv, std::cout, std::cerr); }
