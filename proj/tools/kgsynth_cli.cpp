#include "cli.hpp"

int main(int argc, char** argv) { return kgsynth::cli::run(argc, argv); }
