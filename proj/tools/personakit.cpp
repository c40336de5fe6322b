#include "personakit/cli.hpp"

int main(int argc, char** argv) {
    return personakit::cli::run_main(argc, argv);
}
