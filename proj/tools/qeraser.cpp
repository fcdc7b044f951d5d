#include "qeraser/cli.hpp"

int main(int argc, char** argv) {
    return qeraser::cli::run(argc, argv);
}
