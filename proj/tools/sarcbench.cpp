#include "sarcbench/app.hpp"

int main(int argc, char** argv) { return sarc::run_cli(argc, argv); }
