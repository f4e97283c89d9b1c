#include "rvr/commands.hpp"

int main(int argc, char** argv) { return rvr::run_cli(argc, argv); }
