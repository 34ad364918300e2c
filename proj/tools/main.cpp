#include "mocosim_cli.hpp"

int main(int argc, char **argv) { return mocosim::cli::run(argc, argv); }
