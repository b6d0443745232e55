#include "qsearch/cli.hpp"

int main(int argc, char** argv) { return qsearch::cli::run(argc, argv); }
