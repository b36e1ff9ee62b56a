#include <iostream>

#include "gec/cli.hpp"

int main(int argc, char** argv) { return gec::run_cli(argc, argv, std::cout, std::cerr); }
