#include "warm/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
    return warm::run_cli(argc, argv, std::cout, std::cerr);
}
