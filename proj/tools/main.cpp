#include "nnmt/cli.hpp"

int main(int argc, char** argv) { return nnmt::run_cli(argc, argv); }
