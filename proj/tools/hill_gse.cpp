#include "hillgse/cli.hpp"

int main(int argc, char** argv) { return hillgse::cli::run(argc, argv); }
