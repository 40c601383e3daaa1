#include <monorun/cli.hpp>

int main(int argc, char** argv) { return monorun::cli::run(argc, argv); }
