#include "plqfpi/cli.hpp"

int main(int argc, char** argv) { return plqfpi::cli::run(argc, argv); }
