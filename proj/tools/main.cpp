#include "sealmates/cli.hpp"

int main(int argc, char** argv)
{
    return sealmates::cli::main(argc, argv);
}
