#include "sdpsketch/cli.hpp"

int main(int argc, char** argv) { return sdpsketch::cli_main(argc, argv); }
