#include "thzuav/cli.hpp"

int main(int argc, char** argv) { return thzuav::cli_main(argc, argv); }
