#include "ecokin/app/commands.hpp"

int main(int argc, char** argv) { return ecokin::app::run(argc, argv); }
