#include "cli.hpp"

int
main(int argc, char** argv)
{
  return ckqr::cli::main_entry(argc, argv);
}
