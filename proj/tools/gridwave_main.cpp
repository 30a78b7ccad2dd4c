#include "gridwave/cli.hpp"

int main(int argc, char** argv) { return gridwave::run_cli(argc, argv); }
