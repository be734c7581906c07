#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "pat/attack/loss.hpp"
#include "pat/attack/scene_distribution.hpp"
#include "pat/tracker/network.hpp"

namespace pat::attack {

// Step size alpha applies to iterations i <= until_iteration; the last entry
// also covers everything after it.
struct AlphaStep {
  int until_iteration = 0;
  double alpha = 0.0;
};
using AlphaSchedule = std::vector<AlphaStep>;

// 0.75 for i <= 500, then 0.25.
AlphaSchedule default_alpha_schedule();
// 0.075 for i <= 500, then the refining 0.025.
AlphaSchedule fine_alpha_schedule();
double alpha_at(const AlphaSchedule& schedule, int iteration);

enum class InitMode { random, gray, white, checker, image };
std::string_view init_mode_name(InitMode m);
InitMode parse_init_mode(std::string_view name);

struct AttackConfig {
  int iterations = 1000;
  int batch_size = 20;
  AlphaSchedule alpha = default_alpha_schedule();
  int texture_resolution = 128;
  InitMode init = InitMode::random;
  std::optional<render::Texture> init_image;  // required for InitMode::image
  std::uint64_t seed = 1;
  LossSpec loss = LossSpec::pure(LossTerm::nt);
  SceneDistribution dist = SceneDistribution::defaults();
  int snapshot_every = 100;  // 0 disables snapshots

  void validate() const;
};

render::Texture initial_texture(const AttackConfig& config);

struct SceneGradient {
  double loss = 0.0;
  render::Image grad;  // same shape as the texture
  BBox pred;           // search-relative
  BBox gt;             // search-relative
  std::uint64_t branch_signature = 0;  // of the tracker tape
};

// Render both frames, crop around the previous ground-truth box, predict,
// evaluate the loss and backpropagate onto the texture. Empty when the
// target is absent from either frame or the view is degenerate.
std::optional<SceneGradient> scene_loss_and_texture_grad(const tracker::TrackerWeights& weights,
                                                         const render::Texture& texture, const ScenePair& pair,
                                                         const LossSpec& spec);

struct ExpectedGradient {
  render::Image grad;
  double mean_loss = 0.0;
  int used = 0;
  int skipped = 0;
};

// Mean of the per-scene gradients over non-skipped scenes. Throws Error when
// every scene is skipped.
ExpectedGradient eot_expected_gradient(const tracker::TrackerWeights& weights, const render::Texture& texture,
                                       std::span<const ScenePair> scenes, const LossSpec& spec);

// chi - alpha * sign(grad), clamped to [0, 1].
render::Texture attack_step(const render::Texture& texture, const render::Image& expected_grad, double alpha);

struct AttackIteration {
  int iteration = 0;
  double alpha = 0.0;
  double mean_loss = 0.0;
  int scenes_used = 0;
  int scenes_skipped = 0;
  std::optional<double> mu_ioud;
};

struct AttackRun {
  render::Texture initial;
  render::Texture final_texture;
  std::vector<AttackIteration> history;
  std::vector<std::pair<int, render::Texture>> snapshots;
};

// Called after every iteration with the updated texture; a returned value is
// recorded as that iteration's muIOUd.
using AttackMonitor = std::function<std::optional<double>(int iteration, const render::Texture& texture)>;

// Each minibatch slot redraws its scene up to 10 times while the target is
// absent before the slot is skipped.
AttackRun run_attack(const AttackConfig& config, const tracker::TrackerWeights& weights,
                     const AttackMonitor& monitor = {});

}  // namespace pat::attack
