#include "fpf/cli.hpp"

int main(int argc, char** argv) { return fpf::cli::run(argc, argv); }
