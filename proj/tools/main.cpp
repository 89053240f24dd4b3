#include "swarmform/cli.hpp"

int main(int argc, char** argv) { return swarmform::cli::main_cli(argc, argv); }
