#include <string>
#include <vector>

#include "twowell/cli.hpp"

int main(int argc, char** argv) {
    return twowell::cli::run(std::vector<std::string>(argv + 1, argv + argc));
}
