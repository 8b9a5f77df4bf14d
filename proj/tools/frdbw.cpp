#include <frdbw/cli.hpp>

int
main(int argc, char** argv)
{
  return frdbw::cli::main_entry(argc, argv);
}
