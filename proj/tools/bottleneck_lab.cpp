#include "bottleneck/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return bottleneck::cli::run(argc, argv, std::cout, std::cerr); }
