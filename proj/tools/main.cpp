#include "cli.hpp"

int main(int argc, char** argv) { return invp::cli::main_entry(argc, argv); }
