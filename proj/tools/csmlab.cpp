#include "csmlab/cli.hpp"

int main(int argc, char** argv) { return csmlab::run_cli(argc, argv); }
