#include <iostream>

#include "pkm/cli.hpp"

int main(int argc, char** argv) { return pkm::cli::main_entry(argc, argv, std::cout, std::cerr); }
