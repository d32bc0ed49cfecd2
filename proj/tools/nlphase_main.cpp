#include <iostream>

#include "nlphase/runner.hpp"

int main(int argc, char** argv) { return nlphase::run_cli(argc, argv, std::cout, std::cerr); }
