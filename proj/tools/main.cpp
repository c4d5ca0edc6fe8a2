#include <iostream>

#include "cpdcond/cli.hpp"

int main(int argc, char** argv) { return cpdcond::run_cli(argc, argv, std::cout, std::cerr); }
