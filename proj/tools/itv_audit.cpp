#include <iostream>

#include "itv/cli.hpp"

int main(int argc, char** argv) { return itv::run_cli(argc, argv, std::cout, std::cerr); }
