#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "pat/config.hpp"
#include "pat/error.hpp"
#include "pat/eval/metrics.hpp"
#include "pat/eval/sequence.hpp"
#include "pat/eval/servo.hpp"
#include "pat/render/textures.hpp"

using namespace pat;
using namespace pat::eval;

namespace {

BBox random_box(Rng& rng) {
  const double x0 = uniform(rng, 0.0, 0.9), y0 = uniform(rng, 0.0, 0.9);
  return {x0, y0, uniform(rng, x0, 1.0), uniform(rng, y0, 1.0)};
}

attack::SceneDistribution small_frames() {
  attack::SceneDistribution d = attack::SceneDistribution::defaults();
  d.frame_width = 32;
  d.frame_height = 32;
  d.poster.texture_resolution = 16;
  return d;
}

tracker::TrackerWeights small_net() { return tracker::init_weights(tracker::Capacity::lg_lite, 16, 5); }

}  // namespace

TEST_SUITE("eval") {
  TEST_CASE("area examples") {
    CHECK(area({0.0, 0.0, 1.0, 1.0}) == 1.0);
    CHECK(area({0.3, 0.3, 0.3, 0.9}) == 0.0);
    CHECK(area({0.25, 0.25, 0.75, 0.75}) == 0.25);
  }

  TEST_CASE("iou examples") {
    const BBox a{0.1, 0.2, 0.6, 0.7};
    CHECK(iou(a, a) == 1.0);
    CHECK(iou(a, {0.7, 0.2, 0.9, 0.7}) == 0.0);
    CHECK(iou({0.0, 0.0, 1.0, 1.0}, {0.0, 0.0, 0.5, 1.0}) == 0.5);
    CHECK(iou({0.3, 0.3, 0.3, 0.3}, {0.3, 0.3, 0.3, 0.3}) == 0.0);
  }

  TEST_CASE("closed-form iou agrees with the pixel oracle") {
    Rng rng(1);
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
      const BBox a = random_box(rng), b = random_box(rng);
      worst = std::max(worst, std::fabs(iou(a, b) - iou_pixel_oracle(a, b)));
    }
    CHECK(worst < 0.02);
    const BBox a{0.1, 0.2, 0.6, 0.7};
    CHECK(iou_pixel_oracle(a, a) == 1.0);
    CHECK(iou_pixel_oracle(a, {0.7, 0.2, 0.9, 0.7}) == 0.0);
  }

  TEST_CASE("iou is symmetric and bounded") {
    Rng rng(2);
    for (int i = 0; i < 2000; ++i) {
      const BBox a = random_box(rng), b = random_box(rng);
      const double v = iou(a, b);
      CHECK(v == iou(b, a));
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
      if (area(a) > 0.0) CHECK(iou(a, a) == doctest::Approx(1.0).epsilon(1e-15));
    }
  }

  TEST_CASE("mu_ioud examples") {
    const std::vector<BBox> gt{{0.0, 0.0, 1.0, 1.0}, {0.0, 0.0, 1.0, 1.0}};
    const std::vector<BBox> inert{{0.0, 0.0, 0.8, 1.0}, {0.0, 0.0, 1.0, 0.8}};
    const std::vector<BBox> adv{{0.0, 0.0, 0.5, 1.0}, {0.0, 0.0, 1.0, 0.3}};
    CHECK(mu_ioud(inert, inert, gt) == 0.0);
    CHECK(mu_ioud(inert, adv, gt) == doctest::Approx(0.4));
    const std::vector<BBox> lost{{0.0, 0.0, 0.0, 0.0}, {0.0, 0.0, 0.0, 0.0}};
    CHECK(mu_ioud(gt, lost, gt) == 1.0);
  }

  TEST_CASE("mu_ioud is antisymmetric") {
    Rng rng(3);
    for (int i = 0; i < 100; ++i) {
      std::vector<BBox> a, b, g;
      for (int j = 0; j < 7; ++j) {
        a.push_back(random_box(rng));
        b.push_back(random_box(rng));
        g.push_back(random_box(rng));
      }
      CHECK(mu_ioud(a, b, g) == doctest::Approx(-mu_ioud(b, a, g)).epsilon(1e-15));
    }
  }

  TEST_CASE("mu_ioud rejects length mismatches") {
    const std::vector<BBox> two(2), three(3);
    CHECK_THROWS_AS(mu_ioud(two, three, two), Error);
    CHECK_THROWS_AS(mu_ioud(two, two, three), Error);
  }

  TEST_CASE("two frames give one prediction, and tracking is pure") {
    Rng rng(4);
    const auto script = traversal_script(small_frames(), rng, {.n_frames = 4});
    const render::Texture tex(16, 16, 0.5);
    const EvalSequencePair seq = make_sequence_pair(script, tex, tex);
    const std::span<const render::Image> frames(seq.frames_inert);
    CHECK(track_sequence(small_net(), frames.first(2), seq.gt.front()).boxes.size() == 1);
    const TrackResult a = track_sequence(small_net(), frames, seq.gt.front());
    const TrackResult b = track_sequence(small_net(), frames, seq.gt.front());
    CHECK(a.boxes.size() == 3);
    CHECK(a.boxes == b.boxes);
    CHECK_THROWS_AS(track_sequence(small_net(), frames.first(1), seq.gt.front()), ConfigError);
  }

  TEST_CASE("traversal walks the target across the poster") {
    const attack::SceneDistribution d = small_frames();
    Rng rng(5);
    const auto script = traversal_script(d, rng, {.n_frames = 6});
    REQUIRE(script.size() == 6);
    CHECK(script.front().sprite.pose.x == doctest::Approx(-0.5 * d.poster.width_m));
    CHECK(script.back().sprite.pose.x == doctest::Approx(0.5 * d.poster.width_m));
    for (std::size_t j = 1; j < script.size(); ++j) CHECK(script[j].sprite.pose.x > script[j - 1].sprite.pose.x);
  }

  TEST_CASE("evaluating the source against itself is exactly zero and deterministic") {
    Rng rng(6);
    const render::Texture src = render::inert_texture(16, rng);
    const render::Texture adv = render::make_texture(render::TexturePattern::random, 16, rng);
    const TraversalOptions opts{.n_frames = 5};
    const EvalReport same = evaluate_texture(src, src, small_net(), small_frames(), 3, 9, opts);
    CHECK(same.mean_mu_ioud == 0.0);
    for (const PairReport& p : same.pairs) CHECK(p.mu_ioud == 0.0);
    const EvalReport a = evaluate_texture(adv, src, small_net(), small_frames(), 3, 9, opts);
    const EvalReport b = evaluate_texture(adv, src, small_net(), small_frames(), 3, 9, opts);
    CHECK(a.mean_mu_ioud == b.mean_mu_ioud);
    REQUIRE(a.pairs.size() == 3);
    for (const PairReport& p : a.pairs) {
      CHECK(p.mu_ioud >= -1.0);
      CHECK(p.mu_ioud <= 1.0);
      CHECK(p.iou_adv.size() == 4);
    }
    CHECK_THROWS_AS(evaluate_texture(src, src, small_net(), small_frames(), 0, 9, opts), ConfigError);
  }

  TEST_CASE("pid controller") {
    PidController pid({2.0, 1.0, 0.5}, 0.3);
    CHECK(pid.update(1.0, 0.1) == doctest::Approx(2.0 + 0.1));
    CHECK(pid.update(1.0, 0.1) == doctest::Approx(2.0 + 0.2));
    for (int i = 0; i < 10; ++i) pid.update(1.0, 0.1);
    CHECK(pid.integral() == 0.3);
    PidController zero;
    CHECK(zero.update(5.0, 0.1) == 0.0);
  }

  TEST_CASE("zero gains keep the camera still for every step") {
    Config c = default_config();
    c.set("camera.frame_width", "32");
    c.set("camera.frame_height", "32");
    const render::SceneSpec scene = servo_scene_from(c);
    ServoConfig cfg;
    cfg.lateral = cfg.forward = cfg.vertical = {};
    cfg.n_steps = 12;
    const ServoResult r = servo_sim(small_net(), scene, render::Texture(16, 16, 0.5), cfg);
    CHECK_FALSE(r.terminated);
    REQUIRE(r.trajectory.size() == 12);
    for (const ServoStep& s : r.trajectory) CHECK(s.camera == scene.camera.pose);
    CHECK(r.trajectory.back().target.x > r.trajectory.front().target.x);
  }
}
