#include <iostream>

#include "rsjd/cli.hpp"

int main(int argc, char** argv) { return rsjd::run_cli(argc, argv, std::cout, std::cerr); }
