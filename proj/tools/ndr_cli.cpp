#include <iostream>

#include "ndr/commands.hpp"

int main(int argc, char** argv) { return ndr::run_cli(argc, argv, std::cout, std::cerr); }
