#include "pat/attack/attack.hpp"

#include <algorithm>
#include <limits>

#include <fmt/format.h>

#include "pat/error.hpp"
#include "pat/render/textures.hpp"

namespace pat::attack {

using diff::Tape;
using diff::Tensor;
using diff::Var;

AlphaSchedule default_alpha_schedule() { return {{500, 0.75}, {std::numeric_limits<int>::max(), 0.25}}; }

AlphaSchedule fine_alpha_schedule() { return {{500, 0.075}, {std::numeric_limits<int>::max(), 0.025}}; }

double alpha_at(const AlphaSchedule& schedule, int iteration) {
  if (schedule.empty()) throw ConfigError("alpha schedule is empty");
  for (const AlphaStep& s : schedule) {
    if (iteration <= s.until_iteration) return s.alpha;
  }
  return schedule.back().alpha;
}

std::string_view init_mode_name(InitMode m) {
  switch (m) {
    case InitMode::random: return "random";
    case InitMode::gray: return "gray";
    case InitMode::white: return "white";
    case InitMode::checker: return "checker";
    case InitMode::image: return "image";
  }
  return "unknown";
}

InitMode parse_init_mode(std::string_view name) {
  for (auto m : {InitMode::random, InitMode::gray, InitMode::white, InitMode::checker, InitMode::image}) {
    if (init_mode_name(m) == name) return m;
  }
  throw ConfigError(fmt::format("unknown init mode '{}' (expected random, gray, white, checker, image)", name));
}

void AttackConfig::validate() const {
  if (iterations < 0) throw ConfigError(fmt::format("attack.iterations {} must be >= 0", iterations));
  if (batch_size < 1) throw ConfigError(fmt::format("attack.batch_size {} must be >= 1", batch_size));
  if (texture_resolution <= 0) throw ConfigError("attack.texture_resolution must be positive");
  if (alpha.empty()) throw ConfigError("attack.alpha_schedule is empty");
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    if (!(alpha[i].alpha > 0.0)) throw ConfigError(fmt::format("attack.alpha_schedule: step {} must be positive", alpha[i].alpha));
    if (i > 0 && alpha[i].until_iteration <= alpha[i - 1].until_iteration) {
      throw ConfigError("attack.alpha_schedule: iteration bounds must increase");
    }
  }
  if (init == InitMode::image && !init_image) throw ConfigError("attack.init=image requires an init image");
  if (snapshot_every < 0) throw ConfigError("attack.snapshot_every must be >= 0");
  loss.validate();
  dist.validate();
  if (loss.source_texture && (loss.source_texture->width() != texture_resolution ||
                              loss.source_texture->height() != texture_resolution)) {
    throw ConfigError(fmt::format("source texture is {}x{}, attack texture is {}x{}", loss.source_texture->width(),
                                  loss.source_texture->height(), texture_resolution, texture_resolution));
  }
}

render::Texture initial_texture(const AttackConfig& config) {
  Rng rng(derive_seed(config.seed, 0));
  const int r = config.texture_resolution;
  switch (config.init) {
    case InitMode::random: return render::make_texture(render::TexturePattern::random, r, rng);
    case InitMode::gray: return render::make_texture(render::TexturePattern::gray, r, rng);
    case InitMode::white: return render::make_texture(render::TexturePattern::white, r, rng);
    case InitMode::checker: return render::make_texture(render::TexturePattern::checker, r, rng);
    case InitMode::image: {
      if (!config.init_image) throw ConfigError("attack.init=image requires an init image");
      if (config.init_image->width() != r || config.init_image->height() != r) {
        throw ConfigError(fmt::format("init image is {}x{}, expected {}x{}", config.init_image->width(),
                                      config.init_image->height(), r, r));
      }
      return *config.init_image;
    }
  }
  throw ConfigError("unknown init mode");
}

std::optional<SceneGradient> scene_loss_and_texture_grad(const tracker::TrackerWeights& weights,
                                                         const render::Texture& texture, const ScenePair& pair,
                                                         const LossSpec& spec) {
  RenderedPair frames;
  try {
    frames = render_pair(pair, texture);
  } catch (const DegenerateViewError&) {
    return std::nullopt;
  }
  if (!frames.previous.gt_bbox || !frames.current.gt_bbox) return std::nullopt;

  const tracker::CropRegion region = tracker::crop_region_from_bbox(*frames.previous.gt_bbox);
  const int r = weights.crop_resolution;
  const BBox gt = tracker::frame_to_search(*frames.current.gt_bbox, region);

  Tape tape;
  const auto params = tracker::bind_weights(tape, weights, false);
  const Var prev = tape.leaf(render::to_chw(frames.previous.frame), true);
  const Var cur = tape.leaf(render::to_chw(frames.current.frame), true);
  const Var templ = tape.reshape(tracker::extract_crop(tape, prev, region, r), {1, 3, r, r});
  const Var search = tape.reshape(tracker::extract_crop(tape, cur, region, r), {1, 3, r, r});
  const Var pred = tracker::forward(tape, weights.arch(), params, templ, search);
  const Var gtv = tape.leaf(Tensor({1, 4}, {gt.x_min, gt.y_min, gt.x_max, gt.y_max}));
  const Var loss = adversarial_loss(tape, spec, pred, gtv);
  const diff::Gradients grads = tape.backward(loss);

  SceneGradient out;
  out.loss = tape.value(loss).item();
  out.grad = render::backproject_gradient(render::from_chw(grads[prev]), frames.previous);
  const render::Image g_cur = render::backproject_gradient(render::from_chw(grads[cur]), frames.current);
  for (std::size_t i = 0; i < out.grad.size(); ++i) out.grad.data()[i] += g_cur.data()[i];
  if (spec.w_ps > 0.0) {
    out.loss += spec.w_ps * perceptual_loss(texture, *spec.source_texture);
    const render::Image gps = perceptual_loss_gradient(texture, *spec.source_texture);
    for (std::size_t i = 0; i < out.grad.size(); ++i) out.grad.data()[i] += spec.w_ps * gps.data()[i];
  }
  const Tensor& pv = tape.value(pred);
  out.pred = {pv[0], pv[1], pv[2], pv[3], BoxFrame::search_relative};
  out.gt = gt;
  out.branch_signature = tape.branch_signature();
  return out;
}

ExpectedGradient eot_expected_gradient(const tracker::TrackerWeights& weights, const render::Texture& texture,
                                       std::span<const ScenePair> scenes, const LossSpec& spec) {
  if (scenes.empty()) throw Error("eot_expected_gradient: empty minibatch");
  ExpectedGradient out;
  out.grad = render::Image(texture.width(), texture.height(), 0.0);
  for (const ScenePair& s : scenes) {
    const auto sg = scene_loss_and_texture_grad(weights, texture, s, spec);
    if (!sg) {
      ++out.skipped;
      continue;
    }
    ++out.used;
    out.mean_loss += sg->loss;
    for (std::size_t i = 0; i < out.grad.size(); ++i) out.grad.data()[i] += sg->grad.data()[i];
  }
  if (out.used == 0) throw Error(fmt::format("eot_expected_gradient: all {} scenes were skipped", scenes.size()));
  const double inv = 1.0 / out.used;
  for (double& v : out.grad.data()) v *= inv;
  out.mean_loss *= inv;
  return out;
}

render::Texture attack_step(const render::Texture& texture, const render::Image& expected_grad, double alpha) {
  if (!(alpha > 0.0)) throw ConfigError(fmt::format("attack_step: alpha {} must be positive", alpha));
  if (expected_grad.width() != texture.width() || expected_grad.height() != texture.height()) {
    throw ShapeError(fmt::format("attack_step: gradient {}x{} does not match texture {}x{}", expected_grad.width(),
                                 expected_grad.height(), texture.width(), texture.height()));
  }
  render::Texture out = texture;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double g = expected_grad.data()[i];
    const double sign = g > 0.0 ? 1.0 : (g < 0.0 ? -1.0 : 0.0);
    out.data()[i] = std::clamp(texture.data()[i] - alpha * sign, 0.0, 1.0);
  }
  return out;
}

AttackRun run_attack(const AttackConfig& config, const tracker::TrackerWeights& weights, const AttackMonitor& monitor) {
  config.validate();
  weights.validate();
  constexpr int kMaxDraws = 10;

  AttackRun run;
  run.initial = initial_texture(config);
  render::Texture chi = run.initial;
  Rng rng(derive_seed(config.seed, 1));

  for (int i = 1; i <= config.iterations; ++i) {
    render::Image grad(chi.width(), chi.height(), 0.0);
    AttackIteration rec;
    rec.iteration = i;
    rec.alpha = alpha_at(config.alpha, i);
    for (int b = 0; b < config.batch_size; ++b) {
      std::optional<SceneGradient> sg;
      for (int draw = 0; draw < kMaxDraws && !sg; ++draw) {
        const ScenePair pair = sample_scene_pair(config.dist, rng);
        sg = scene_loss_and_texture_grad(weights, chi, pair, config.loss);
      }
      if (!sg) {
        ++rec.scenes_skipped;
        continue;
      }
      ++rec.scenes_used;
      rec.mean_loss += sg->loss;
      for (std::size_t k = 0; k < grad.size(); ++k) grad.data()[k] += sg->grad.data()[k];
    }
    if (rec.scenes_used > 0) {
      const double inv = 1.0 / rec.scenes_used;
      for (double& v : grad.data()) v *= inv;
      rec.mean_loss *= inv;
      chi = attack_step(chi, grad, rec.alpha);
    }
    if (monitor) rec.mu_ioud = monitor(i, chi);
    run.history.push_back(rec);
    if (config.snapshot_every > 0 && i % config.snapshot_every == 0) run.snapshots.emplace_back(i, chi);
  }
  run.final_texture = chi;
  return run;
}

}  // namespace pat::attack
