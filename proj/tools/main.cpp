#include "mdsum/cli.hpp"

int main(int argc, char** argv) {
    return mdsum::run_command({argv + 1, argv + argc});
}
