#include "iotguard/cli.hpp"

int main(int argc, char** argv) { return iotguard::run_cli(argc, argv); }
