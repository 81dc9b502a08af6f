#include "secrel/report.hpp"
int main(int argc, char** argv) { return secrel::run_cli(argc, argv); }
