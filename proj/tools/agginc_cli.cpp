#include "agginc/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return agginc::run_cli(argc, argv, std::cout, std::cerr); }
