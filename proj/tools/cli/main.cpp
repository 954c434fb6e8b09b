#include "cli/cli.hpp"

int main(int argc, char** argv) { return ctsm::cli::run(argc, argv); }
