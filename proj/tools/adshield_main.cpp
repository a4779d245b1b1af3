#include <iostream>

#include "adshield/cli.hpp"

int main(int argc, char** argv) { return adshield::run_cli(argc, argv, std::cout, std::cerr); }
