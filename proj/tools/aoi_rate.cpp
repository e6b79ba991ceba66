#include "aoirate/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return aoirate::cli::run_cli(argc, argv, std::cout, std::cerr); }
