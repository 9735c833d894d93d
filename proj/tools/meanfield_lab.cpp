#include <iostream>

#include "meanfield/cli.hpp"

int main(int argc, char** argv) { return meanfield::run_cli(argc, argv, std::cout); }
