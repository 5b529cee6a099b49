#include "margin_paths/harness.hpp"

int main(int argc, char** argv) { return mpaths::harness::cli_main(argc, argv); }
