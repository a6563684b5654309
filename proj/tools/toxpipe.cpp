#include <iostream>

#include "toxpipe/cli.hpp"

int main(int argc, char** argv) { return toxpipe::run_cli(argc, argv, std::cout, std::cerr); }
