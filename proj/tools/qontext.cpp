#include <qontext/cli.hpp>

int main(int argc, char** argv) { return qontext::run_cli(argc, argv); }
