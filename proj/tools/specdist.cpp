#include <iostream>

#include "specdist/cli.hpp"

int main(int argc, char** argv) { return specdist::cli::run(argc, argv, std::cout, std::cerr); }
