#include <iostream>

#include "plpair/commands.hpp"

int main(int argc, char** argv)
{
    return plpair::run_cli(argc, argv, std::cout, std::cerr);
}
