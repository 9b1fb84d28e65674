#include "experiment.hpp"

int main(int argc, char** argv) { return gne::cli::run_cli(argc, argv); }
