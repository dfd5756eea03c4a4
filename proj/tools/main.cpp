#include <vector>

#include "kinemotion/cli.hpp"

int main(int argc, char** argv) {
    return kinemotion::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
