#include "btfp/cli.hpp"

int main(int argc, char** argv) { return btfp::cli::run(argc, argv); }
