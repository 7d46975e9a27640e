#include "rayfield/cli.hpp"

int main(int argc, char** argv) { return rayfield::cli::run(argc, argv); }
