#include "cli.hpp"

int main(int argc, char** argv) { return sbcrb::cli::main_entry(argc, argv); }
