#include "kds/cli.hpp"

int main(int argc, char** argv) { return kds::run_cli(argc, argv); }
