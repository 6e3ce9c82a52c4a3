#include "layerfield/cli.hpp"

int main(int argc, char** argv) { return layerfield::cli::run(argc, argv); }
