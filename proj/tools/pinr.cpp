#include <iostream>

#include "pinr/cli.hpp"
#include "pinr/runtime.hpp"

int main(int argc, char** argv) {
  pinr::configure_allocator();
  return pinr::run_cli(argc, argv, std::cout, std::cerr);
}
