#include <iostream>

#include "gwrdp/app.hpp"

int main(int argc, char** argv) { return gwrdp::run_cli(argc, argv, std::cout, std::cerr); }
