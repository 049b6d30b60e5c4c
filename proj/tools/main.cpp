#include <iostream>

#include "dialectid/cli.hpp"

int main(int argc, char** argv) { return dialectid::run_cli(argc, argv, std::cout, std::cerr); }
