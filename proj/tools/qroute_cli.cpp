#include "qroute/harness.hpp"

int main(int argc, char** argv) { return qroute::cli(argc, argv); }
