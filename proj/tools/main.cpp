#include "cli.hpp"

int main(int argc, char** argv) { return ricci::cli::main_entry(argc, argv); }
