#include "runner.hpp"

int main(int argc, char** argv) { return echoforge::cli::main(argc, argv); }
