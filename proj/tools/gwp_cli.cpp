#include "gwp/cli.hpp"

int main(int argc, char** argv) { return gwp::cli::run(argc, argv); }
