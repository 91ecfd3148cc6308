#include <iostream>

#include "aliased_ac/harness.hpp"

int main(int argc, char** argv) { return aliased_ac::cli_main(argc, argv, std::cout, std::cerr); }
