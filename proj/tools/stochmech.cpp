#include "stochmech/cli.hpp"

int main(int argc, char** argv) { return stochmech::cli::run(argc, argv); }
