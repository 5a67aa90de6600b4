#include "smalldev/cli.hpp"

int main(int argc, char** argv) { return smalldev::cli::run(argc, argv); }
