#include <iostream>

#include "sbg/cli.hpp"

int main(int argc, char** argv) { return sbg::cli_main(argc, argv, std::cout, std::cerr); }
