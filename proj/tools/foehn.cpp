#include "foehn/cli.hpp"

int main(int argc, char** argv) { return foehn::run_cli(argc, argv); }
