#include "mkvlab/cli.hpp"

int main(int argc, char** argv) { return mkvlab::cli::main_entry(argc, argv); }
