#include "procat/cli.hpp"

int main(int argc, char** argv) { return procat::cli_main(argc, argv); }
