#include "cli_commands.hpp"

int main(int argc, char** argv) { return cvbell::cli::run(argc, argv); }
