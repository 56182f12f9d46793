#include <iostream>

#include "unravel/cli.hpp"

int main(int argc, char** argv) { return unravel::run_cli(argc, argv, std::cout, std::cerr); }
