#include "pspin/cli.hpp"

int main(int argc, char** argv) { return pspin::cli(argc, argv); }
