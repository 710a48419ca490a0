#include <iostream>

#include "fmgls_cli/commands.hpp"

int main(int argc, char** argv) { return fmgls::cli::run_cli(argc, argv, std::cout, std::cerr); }
