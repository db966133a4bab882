#include <iostream>

#include "lprep/cli.h"

int main(int argc, char **argv) {
    return lprep::cli::run({argv + 1, argv + argc}, std::cout, std::cerr);
}
