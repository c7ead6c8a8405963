#include <iostream>

#include "selfcal/cli.hpp"

int main(int argc, char** argv) { return selfcal::run_cli(argc, argv, std::cout, std::cerr); }
