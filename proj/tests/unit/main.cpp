#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include "pat/platform.hpp"

int main(int argc, char** argv) {
  pat::configure_allocator();
  doctest::Context ctx(argc, argv);
  return ctx.run();
}
