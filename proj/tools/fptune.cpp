#include "fptune/cli.hpp"

int main(int argc, char** argv) { return fptune::run_cli(argc, argv); }
