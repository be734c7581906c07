#include <benchmark/benchmark.h>

#include "pat/diff/tape.hpp"
#include "pat/rng.hpp"

using namespace pat;
using namespace pat::diff;

namespace {

Tensor random_tensor(Shape shape, std::uint64_t seed) {
  Tensor t(std::move(shape));
  Rng rng(seed);
  for (double& v : t.data()) v = uniform(rng, -1.0, 1.0);
  return t;
}

// First tracker layer: 3 -> 16 channels, 5x5, stride 2 on a 64x64 crop.
void BM_Conv2dForwardBackward(benchmark::State& state) {
  const int batch = static_cast<int>(state.range(0));
  const Tensor x = random_tensor({batch, 3, 64, 64}, 1);
  const Tensor w = random_tensor({16, 3, 5, 5}, 2);
  const Tensor b = random_tensor({16}, 3);
  for (auto _ : state) {
    Tape tape;
    const Var xv = tape.leaf(x, true);
    const Var out = tape.sum(tape.conv2d(xv, tape.leaf(w, true), tape.leaf(b, true), 2, 2));
    benchmark::DoNotOptimize(tape.backward(out));
  }
  state.SetItemsProcessed(state.iterations() * batch);
}
BENCHMARK(BM_Conv2dForwardBackward)->Arg(1)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_ResizeBilinear(benchmark::State& state) {
  const Tensor x = random_tensor({3, 128, 128}, 4);
  for (auto _ : state) {
    Tape tape;
    const Var xv = tape.leaf(x, true);
    benchmark::DoNotOptimize(tape.backward(tape.sum(tape.resize_bilinear(xv, 64, 64))));
  }
}
BENCHMARK(BM_ResizeBilinear)->Unit(benchmark::kMicrosecond);

}  // namespace
