#include "entlab/cli.hpp"

int main(int argc, char** argv) { return entlab::cli::dispatch(argc, argv); }
