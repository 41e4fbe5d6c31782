#include <iostream>

#include "lpstable/cli/commands.hpp"

int main(int argc, char** argv) { return lpstable::cli::run(argc, argv, std::cout, std::cerr); }
