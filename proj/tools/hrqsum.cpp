#include "hrqsum/cli.hpp"

int main(int argc, char** argv) { return hrqsum::cli::main(argc, argv); }
