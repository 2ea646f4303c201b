#include <iostream>

#include "sphdist/cli.hpp"

int main(int argc, char** argv) { return sphdist::cli::run(argc, argv, std::cout, std::cerr); }
