#include "lipfield/cli.hpp"

int main(int argc, char** argv) { return lipfield::cli::main(argc, argv); }
