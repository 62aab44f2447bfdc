#include <iostream>
#include <string>
#include <vector>

#include "neuim/cli.hpp"

int main(int argc, char** argv) {
    const std::vector<std::string> args(argv + 1, argv + argc);
    return neuim::run_cli(args, std::cout, std::cerr);
}
