#include <iostream>

#include "ccp3/cli.hpp"

int main(int argc, char** argv) { return ccp3::cli_main(argc, argv, std::cout, std::cerr); }
