#include <benchmark/benchmark.h>

#include "pat/attack/scene_distribution.hpp"
#include "pat/render/renderer.hpp"
#include "pat/render/textures.hpp"

using namespace pat;

namespace {

void BM_RenderScene(benchmark::State& state) {
  attack::SceneDistribution d = attack::SceneDistribution::defaults();
  d.frame_width = d.frame_height = static_cast<int>(state.range(0));
  Rng rng(1);
  const attack::ScenePair pair = attack::sample_scene_pair(d, rng);
  const render::Texture tex = render::make_texture(render::TexturePattern::random, 128, rng);
  for (auto _ : state) benchmark::DoNotOptimize(render::render_scene(pair.current, tex));
}
BENCHMARK(BM_RenderScene)->Arg(64)->Arg(128)->Unit(benchmark::kMicrosecond);

void BM_Backproject(benchmark::State& state) {
  attack::SceneDistribution d = attack::SceneDistribution::defaults();
  d.frame_width = d.frame_height = 128;
  Rng rng(2);
  const attack::ScenePair pair = attack::sample_scene_pair(d, rng);
  const render::RenderOutput out =
      render::render_scene(pair.current, render::make_texture(render::TexturePattern::random, 128, rng));
  const render::Image g(128, 128, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(render::backproject_gradient(g, out));
}
BENCHMARK(BM_Backproject)->Unit(benchmark::kMicrosecond);

}  // namespace
