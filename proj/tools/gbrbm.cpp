#include <iostream>

#include "gbrbm/cli.hpp"

int main(int argc, char** argv) { return gbrbm::cli::run(argc, argv, std::cout, std::cerr); }
