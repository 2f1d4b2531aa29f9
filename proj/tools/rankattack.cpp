#include <string>
#include <vector>

#include "rankattack/cli.hpp"

int main(int argc, char** argv) {
    return rankattack::cli::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
