#include <iostream>

#include "wordmap/cli.hpp"

int main(int argc, char** argv) { return wordmap::cli::main_entry(argc, argv, std::cout, std::cerr); }
