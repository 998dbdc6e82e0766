#include "fundbench/cli.hpp"

int main(int argc, char** argv) {
    return fundbench::cli::run(argc, argv);
}
