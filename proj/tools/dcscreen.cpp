#include "dcscreen/cli.hpp"

int main(int argc, char** argv) { return dcscreen::cli::run(argc, argv); }
