#include "scdc/cli.hpp"

int main(int argc, char** argv) { return scdc::cli::run(argc, argv); }
