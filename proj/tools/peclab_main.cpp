#include <string>
#include <vector>

#include "peclab/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return peclab::run_cli(args);
}
