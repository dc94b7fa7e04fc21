#include "calbehav/cli.hpp"

int main(int argc, char** argv) { return calbehav::run_cli(argc, argv); }
