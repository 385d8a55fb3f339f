#include "lgdm/harness/cli.hpp"

int main(int argc, char** argv) { return lgdm::cli_main(argc, argv); }
