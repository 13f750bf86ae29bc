#include "groupsel/cli.hpp"

int main(int argc, char** argv) { return groupsel::cli::run(argc, argv); }
