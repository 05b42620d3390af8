#include <iostream>
#include <string>
#include <vector>

#include "pmfp/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return pmfp::cli::run(args, std::cout, std::cerr);
}
