#include "starpinch/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return starpinch::run_cli(argc, argv, std::cout, std::cerr); }
