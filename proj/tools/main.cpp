#include <iostream>

#include "polarcorr/cli.hpp"

int main(int argc, char** argv) { return polarcorr::cli::run_cli(argc, argv, std::cout, std::cerr); }
