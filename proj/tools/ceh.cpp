#include <iostream>

#include "ceh/cli.hpp"

int main(int argc, char** argv) { return ceh::cli::run(argc, argv, std::cout, std::cerr); }
