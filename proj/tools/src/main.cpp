#include <iostream>

#include "wfr/cli.hpp"

int main(int argc, char** argv) { return wfr::cli::run(argc, argv, std::cout, std::cerr); }
