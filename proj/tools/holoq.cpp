#include "holoq/cli.hpp"

int main(int argc, char** argv) { return holoq::run_cli(argc, argv); }
