#include "qsense/cli.hpp"

int main(int argc, char** argv) { return qsense::run_cli(argc, argv); }
