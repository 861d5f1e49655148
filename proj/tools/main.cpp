#include "gaitformer/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return gaitformer::cli::run(argc, argv, std::cout, std::cerr); }
