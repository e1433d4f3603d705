#include <iostream>

#include "speclab/cli.hpp"

int main(int argc, char** argv) { return speclab::cli_main(argc, argv, std::cout, std::cerr); }
