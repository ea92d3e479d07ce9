#include "diffged/cli.hpp"

int main(int argc, char** argv) { return diffged::run_cli(argc, argv); }
