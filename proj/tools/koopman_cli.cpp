#include "koopman/cli.hpp"

int main(int argc, char** argv) { return koopman::cli_main(argc, argv); }
