#include "panverif/cli.hpp"

int main(int argc, char** argv) { return panverif::cli_main(argc, argv); }
