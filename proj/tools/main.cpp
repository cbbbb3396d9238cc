#include "commands.hpp"

int main(int argc, char** argv) { return pnpkit::cli::run_cli(argc, argv); }
