#include "flashcrowd/cli.hpp"

int main(int argc, char** argv) { return flashcrowd::run_cli(argc, argv); }
