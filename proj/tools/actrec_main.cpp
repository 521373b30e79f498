#include "actrec/harness.hpp"

int main(int argc, char** argv) { return actrec::cli(argc, argv); }
