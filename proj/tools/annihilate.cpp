#include "annihilate/cli.hpp"

#include <iostream>

int main(int argc, char** argv)
{
    return annihilate::run_cli(argc, argv, std::cout, std::cerr);
}
