#include "cli.hpp"

int main(int argc, char** argv) { return ambool::run_cli({argv + 1, argv + argc}); }
