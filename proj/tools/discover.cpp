#include <iostream>
#include <string>
#include <vector>

#include "discover/cli.hpp"

int main(int argc, char** argv)
{
    std::vector<std::string> args(argv + 1, argv + argc);
    return discover::cli::main(args, std::cout, std::cerr);
}
