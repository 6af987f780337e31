#include <iostream>

#include "mirage/cli/cli.hpp"

int main(int argc, char** argv) { return mirage::cli::dispatch(argc, argv, std::cout, std::cerr); }
