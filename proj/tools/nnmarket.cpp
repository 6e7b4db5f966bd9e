#include "nnmarket/cli.hpp"

int main(int argc, char** argv) { return nnmarket::run(argc, argv); }
