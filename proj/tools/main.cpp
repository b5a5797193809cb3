#include "mlpo/cli.hpp"

int main(int argc, char** argv) { return mlpo::cli_main(argc, argv); }
