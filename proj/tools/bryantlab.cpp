#include "bryant/cli.hpp"

int main(int argc, char** argv) { return bryant::cli::run(argc, argv); }
