#include "cofi/cli/app.hpp"

int main(int argc, char** argv) { return cofi::cli::run_cli(argc, argv); }
