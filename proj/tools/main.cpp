#include "proofloop/cli.hpp"

int main(int argc, char** argv) { return proofloop::cli::dispatch(argc, argv); }
