#include <dop/cli.hpp>

int main(int argc, char** argv) { return dop::cli::main(argc, argv); }
