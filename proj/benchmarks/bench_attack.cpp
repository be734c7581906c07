#include <benchmark/benchmark.h>

#include <vector>

#include "pat/attack/attack.hpp"
#include "pat/render/textures.hpp"

using namespace pat;

namespace {

// One EOT iteration at the desk-scale settings: B scenes, 64x64 frames and
// texture, untrained Lg-lite.
void BM_EotStep(benchmark::State& state) {
  const int batch = static_cast<int>(state.range(0));
  attack::SceneDistribution d = attack::SceneDistribution::defaults();
  d.frame_width = d.frame_height = 64;
  d.poster.texture_resolution = 64;
  const tracker::TrackerWeights w = tracker::init_weights(tracker::Capacity::lg_lite, 64, 1);
  Rng rng(3);
  render::Texture chi = render::make_texture(render::TexturePattern::random, 64, rng);
  std::vector<attack::ScenePair> scenes;
  while (static_cast<int>(scenes.size()) < batch) {
    const attack::ScenePair p = attack::sample_scene_pair(d, rng);
    if (attack::scene_loss_and_texture_grad(w, chi, p, attack::LossSpec::pure(attack::LossTerm::nt))) {
      scenes.push_back(p);
    }
  }
  const attack::LossSpec spec = attack::LossSpec::pure(attack::LossTerm::nt);
  for (auto _ : state) {
    const attack::ExpectedGradient g = attack::eot_expected_gradient(w, chi, scenes, spec);
    chi = attack::attack_step(chi, g.grad, 0.25);
    benchmark::DoNotOptimize(chi);
  }
  state.SetItemsProcessed(state.iterations() * batch);
}
BENCHMARK(BM_EotStep)->Arg(1)->Arg(8)->Unit(benchmark::kMillisecond);

}  // namespace
