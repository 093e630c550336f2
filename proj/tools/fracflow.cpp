#include <iostream>

#include "fracflow/commands.hpp"

int main(int argc, char** argv)
{
    return fracflow::run_cli(argc, argv, std::cout, std::cerr);
}
