// SPDX-License-Identifier: Apache-2.0
#include <iostream>

#include "divbar/cli.hpp"

int main(int argc, char** argv)
{
    return divbar::run_cli(argc, argv, std::cout, std::cerr);
}
