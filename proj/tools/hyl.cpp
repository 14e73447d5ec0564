#include "cli/commands.hpp"

int main(int argc, char** argv) { return hyl::cli::run_cli(argc, argv); }
