#include <iostream>

#include "dlvdb/cli.hpp"

int main(int argc, char** argv) { return dlvdb::run_cli(argc, argv, std::cout, std::cerr); }
