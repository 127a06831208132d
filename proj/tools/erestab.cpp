#include <erestab/cli.hpp>

int main(int argc, char** argv) { return erestab::cli::run(argc, argv); }
