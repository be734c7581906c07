#include "pat/checks.hpp"

#include <chrono>

#include "pat/attack/attack.hpp"
#include "pat/error.hpp"
#include "pat/render/image.hpp"
#include "pat/rng.hpp"
#include "pat/tracker/network.hpp"

namespace pat::checks {

using diff::Tape;
using diff::Tensor;
using diff::Var;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

Tensor uniform_tensor(diff::Shape shape, Rng& rng, double lo, double hi) {
  Tensor t(std::move(shape));
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = uniform(rng, lo, hi);
  return t;
}

render::Texture tensor_to_texture(const Tensor& t, int res) {
  return render::Texture(res, res, std::vector<double>(t.data().begin(), t.data().end()));
}

constexpr int kTextureRes = 16;
constexpr int kCrop = 16;

}  // namespace

attack::ScenePair tiny_scene_pair() {
  render::SceneSpec s;
  s.camera.pose = {0.0, -3.0, 1.0, 0.0, 0.0, 0.0};
  s.camera.horizontal_fov = 60.0;
  s.camera.frame_width = 32;
  s.camera.frame_height = 32;
  s.poster.texture_resolution = kTextureRes;
  s.sprite.identity = render::TargetIdentity::green_person;
  s.sprite.pose = {0.35, -1.0, 0.0, 0.0, 0.0, 90.0};
  s.sprite.height_m = 1.75;
  s.background = render::Background::school;
  s.light = {30.0, 0.1, 0.6};
  s.ambient_fraction = 0.2;

  attack::ScenePair pair;
  pair.previous = s;
  pair.camera_delta = {0.02, 0.05, 0.0, 0.0, 0.0, 0.5};
  pair.target_delta = {0.06, 0.02, 0.0, 0.0, 0.0, 4.0};
  pair.current = s;
  pair.current.camera.pose = s.camera.pose + pair.camera_delta;
  pair.current.sprite.pose = s.sprite.pose + pair.target_delta;
  return pair;
}

CompositeCheck tracker_composite(std::uint64_t seed) {
  const auto t0 = Clock::now();
  Rng rng(seed);
  const tracker::TrackerWeights w = tracker::init_weights(tracker::Capacity::lg_lite, kCrop, derive_seed(seed, 1));
  const Tensor templ = uniform_tensor({1, 3, kCrop, kCrop}, rng, 0.0, 1.0);
  const Tensor search = uniform_tensor({1, 3, kCrop, kCrop}, rng, 0.0, 1.0);
  const Tensor gt({1, 4}, {0.3, 0.2, 0.7, 0.9});
  const Tensor patch = uniform_tensor({1, 3, 8, 8}, rng, 0.0, 1.0);

  // The probe replaces the centre 8x8 patch of the search crop.
  auto f = [&](Tape& tape, Var x) {
    const auto params = tracker::bind_weights(tape, w, false);
    const Var base = tape.leaf(search);
    const Var mid = tape.slice(base, 2, 4, 12);
    const std::array<Var, 3> row{tape.slice(mid, 3, 0, 4), x, tape.slice(mid, 3, 12, 16)};
    const std::array<Var, 3> rows{tape.slice(base, 2, 0, 4), tape.concat(row, 3), tape.slice(base, 2, 12, 16)};
    const Var s = tape.concat(rows, 2);
    const Var pred = tracker::forward(tape, w.arch(), params, tape.leaf(templ), s);
    return tape.mean(tape.abs(tape.sub(pred, tape.leaf(gt))));
  };
  CompositeCheck c;
  c.name = "tracker";
  c.result = diff::grad_check(f, patch, kFiniteDifferenceStep);
  c.coordinates = patch.size();
  c.seconds = seconds_since(t0);
  return c;
}

CompositeCheck render_composite(std::uint64_t seed) {
  const auto t0 = Clock::now();
  Rng rng(seed);
  const render::SceneSpec scene = tiny_scene_pair().previous;
  const Tensor x = uniform_tensor({kTextureRes, kTextureRes, 3}, rng, 0.1, 0.9);
  const int w = scene.camera.frame_width, h = scene.camera.frame_height;
  render::Image probe(w, h, 0.0);
  for (double& v : probe.data()) v = uniform(rng, -1.0, 1.0);

  auto value = [&](const Tensor& t) {
    const render::RenderOutput out = render::render_scene(scene, tensor_to_texture(t, kTextureRes));
    double s = 0.0;
    for (std::size_t i = 0; i < probe.size(); ++i) s += probe.data()[i] * out.frame.data()[i];
    return s;
  };
  auto gradient = [&](const Tensor& t) {
    const render::RenderOutput out = render::render_scene(scene, tensor_to_texture(t, kTextureRes));
    return Tensor(t.shape(), render::backproject_gradient(probe, out).data());
  };
  CompositeCheck c;
  c.name = "render";
  c.result = diff::grad_check(value, gradient, x, kFiniteDifferenceStep);
  c.coordinates = x.size();
  c.seconds = seconds_since(t0);
  return c;
}

CompositeCheck pipeline_composite(std::uint64_t seed) {
  const auto t0 = Clock::now();
  Rng rng(seed);
  const attack::ScenePair pair = tiny_scene_pair();
  const tracker::TrackerWeights w = tracker::init_weights(tracker::Capacity::lg_lite, kCrop, derive_seed(seed, 1));
  const attack::LossSpec spec = attack::LossSpec::pure(attack::LossTerm::nt);
  const Tensor x = uniform_tensor({kTextureRes, kTextureRes, 3}, rng, 0.1, 0.9);

  auto run = [&](const Tensor& t) {
    auto sg = attack::scene_loss_and_texture_grad(w, tensor_to_texture(t, kTextureRes), pair, spec);
    if (!sg) throw Error("pipeline gradcheck: target not visible in the probe scene");
    return *sg;
  };
  CompositeCheck c;
  c.name = "pipeline";
  c.result = diff::grad_check([&](const Tensor& t) { return run(t).loss; },
                              [&](const Tensor& t) { return Tensor(t.shape(), run(t).grad.data()); }, x,
                              kFiniteDifferenceStep, 1e-6,
                              [&](const Tensor& t) { return run(t).branch_signature; });
  c.coordinates = x.size();
  c.seconds = seconds_since(t0);
  return c;
}

std::vector<CompositeCheck> gradcheck_suite(std::uint64_t seed) {
  return {tracker_composite(derive_seed(seed, 10)), render_composite(derive_seed(seed, 11)),
          pipeline_composite(derive_seed(seed, 12))};
}

}  // namespace pat::checks
