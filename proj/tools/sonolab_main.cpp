#include "sonolab/runner.hpp"

int main(int argc, char** argv) { return sonolab::run::run_cli(argc, argv); }
