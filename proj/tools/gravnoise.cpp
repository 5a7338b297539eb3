#include <iostream>
#include <string>
#include <vector>

#include "gravnoise/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return gravnoise::cli::run(args, std::cout, std::cerr);
}
