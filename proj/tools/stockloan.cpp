#include "stockloan/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
    return stockloan::cli::run(argc, argv, std::cout, std::cerr);
}
