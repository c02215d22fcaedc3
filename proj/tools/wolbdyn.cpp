#include "wolbdyn/cli/commands.hpp"

#include <iostream>

int main(int argc, char** argv) { return wolbdyn::cli::main_entry(argc, argv, std::cout, std::cerr); }
