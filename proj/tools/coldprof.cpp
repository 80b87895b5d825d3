#include <iostream>

#include "coldprof/cli.hpp"

int main(int argc, char** argv) { return coldprof::run_cli(argc, argv, std::cout, std::cerr); }
