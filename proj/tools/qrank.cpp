#include "cli.hpp"

int main(int argc, char** argv) { return qrank::cli::run(argc, argv); }
