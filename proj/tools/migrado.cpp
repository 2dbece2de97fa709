#include <iostream>

#include "migrado/cli.hpp"

int main(int argc, char** argv) { return migrado::run_cli(argc, argv, std::cout, std::cerr); }
