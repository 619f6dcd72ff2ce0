#include <iostream>

#include "h2kit/pipeline.hpp"

int main(int argc, char** argv) { return h2kit::cli::run(argc, argv, std::cout, std::cerr); }
