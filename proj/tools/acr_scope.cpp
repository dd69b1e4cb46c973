#include <iostream>

#include "acr/cli/cli.hpp"

int main(int argc, char** argv) {
    acr::cli::configure_logging();
    return acr::cli::run(argc, argv, std::cout, std::cerr);
}
