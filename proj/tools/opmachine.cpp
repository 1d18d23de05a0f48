#include "opmachine/cli.hpp"

int main(int argc, char** argv) { return opm::cli::run(argc, argv); }
