#include "eldpp/cli.hpp"

int main(int argc, char** argv) { return eldpp::cli::run(argc, argv); }
