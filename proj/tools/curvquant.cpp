#include <iostream>

#include "curvquant/cli.hpp"

int main(int argc, char** argv) { return curvquant::cli::run(argc, argv, std::cout, std::cerr); }
