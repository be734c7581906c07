#include <benchmark/benchmark.h>

#include "pat/platform.hpp"

int main(int argc, char** argv) {
  pat::configure_allocator();
  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
