#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <cstdlib>
#include <cmath>
#include <filesystem>

#include "pat/config.hpp"
#include "pat/eval/metrics.hpp"
#include "pat/platform.hpp"
#include "pat/render/textures.hpp"
#include "pat/tracker/weights_io.hpp"

using namespace pat;

namespace {

const tracker::TrackerWeights& weights() {
  static const tracker::TrackerWeights w = [] {
    const char* path = std::getenv("PAT_TRAINED_WEIGHTS");
    REQUIRE_MESSAGE(path != nullptr, "PAT_TRAINED_WEIGHTS is not set");
    return tracker::load_weights(path);
  }();
  return w;
}

attack::SceneDistribution static_distribution() {
  attack::SceneDistribution d = scene_distribution_from(default_config());
  const attack::Range zero = attack::Range::point(0.0);
  d.camera_delta = {zero, zero, zero, zero, zero, zero};
  d.target_delta = {zero, zero, zero, zero, zero, zero};
  return d;
}

}  // namespace

TEST_CASE("trained tracker holds a static target for 30 frames") {
  const attack::SceneDistribution d = static_distribution();
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Rng rng(seed);
    const attack::ScenePair pair = attack::sample_scene_pair(d, rng);
    const render::Texture tex = render::inert_texture(128, rng);
    const render::RenderOutput frame = render::render_scene(pair.previous, tex);
    if (!frame.gt_bbox) continue;
    const std::vector<render::Image> frames(30, frame.frame);
    const eval::TrackResult r = eval::track_sequence(weights(), frames, *frame.gt_bbox);
    REQUIRE(r.boxes.size() == 29);
    for (const BBox& b : r.boxes) CHECK(eval::iou(b, *frame.gt_bbox) >= 0.5);
  }
}

TEST_CASE("trained tracker localizes a centred template") {
  const tracker::TrackingDataset data =
      tracker::synth_tracking_dataset(static_distribution(), 100, 77, weights().crop_resolution);
  CHECK(tracker::mean_iou(weights(), data) >= 0.6);
}

TEST_CASE("random-noise texture against an inert source stays near zero muIOUd") {
  const Config& c = default_config();
  const attack::SceneDistribution d = scene_distribution_from(c);
  Rng rng(78);
  const render::Texture source = render::inert_texture(64, rng);
  const render::Texture noise = render::make_texture(render::TexturePattern::random, 64, rng);
  const eval::EvalReport r = eval::evaluate_texture(noise, source, weights(), d, 20, 79, traversal_options_from(c));
  CHECK(std::fabs(r.mean_mu_ioud) < 0.05);
}

TEST_CASE("servo follows a walking target without breakaway") {
  const Config& c = default_config();
  const render::SceneSpec scene = servo_scene_from(c);
  const eval::ServoResult r = eval::servo_sim(weights(), scene, render::Texture(128, 128, 0.5), servo_config_from(c));
  CHECK_FALSE(r.breakaway);
  CHECK_FALSE(r.terminated);
  CHECK(r.trajectory.size() == 100);
}

int main(int argc, char** argv) {
  configure_allocator();
  doctest::Context ctx(argc, argv);
  return ctx.run();
}
