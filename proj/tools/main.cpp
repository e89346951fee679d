#include "wielab/cli.hpp"

int main(int argc, char** argv) { return wielab::cli_main(argc, argv); }
