#include "mdemap/cli.hpp"

int main(int argc, char** argv) { return mdemap::cli::run(argc, argv); }
