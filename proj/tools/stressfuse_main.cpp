#include "stressfuse/cli/commands.hpp"

int main(int argc, char** argv) { return stressfuse::cli::run_cli(argc, argv); }
