#include "spps/cli.hpp"

int main(int argc, char** argv) { return spps::run(argc, argv); }
