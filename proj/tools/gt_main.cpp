#include "gt/cli.hpp"

int main(int argc, char** argv) { return gt::run_cli(argc, argv); }
