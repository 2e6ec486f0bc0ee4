#include "trafficsim/cli.h"

int main(int argc, char **argv) { return trafficsim::runCli(argc, argv); }
