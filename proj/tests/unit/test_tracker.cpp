#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "pat/checks.hpp"
#include "pat/error.hpp"
#include "pat/tracker/dataset.hpp"
#include "pat/tracker/trainer.hpp"
#include "pat/tracker/weights_io.hpp"

using namespace pat;
using namespace pat::tracker;

namespace {

render::Image random_image(int w, int h, Rng& rng) {
  render::Image img(w, h);
  for (double& v : img.data()) v = uniform(rng, 0.0, 1.0);
  return img;
}

attack::SceneDistribution static_distribution() {
  attack::SceneDistribution d = attack::SceneDistribution::defaults();
  const attack::Range zero = attack::Range::point(0.0);
  d.camera_delta = {zero, zero, zero, zero, zero, zero};
  d.target_delta = {zero, zero, zero, zero, zero, zero};
  d.frame_width = 64;
  d.frame_height = 64;
  return d;
}

}  // namespace

TEST_SUITE("tracker") {
  TEST_CASE("crop region is twice the previous box around its centre") {
    const CropRegion r = crop_region_from_bbox({0.4, 0.3, 0.6, 0.7});
    CHECK(r.center_x == doctest::Approx(0.5));
    CHECK(r.center_y == doctest::Approx(0.5));
    CHECK(r.width == doctest::Approx(0.4));
    CHECK(r.height == doctest::Approx(0.8));
  }

  TEST_CASE("full-frame crop at native resolution is the identity") {
    Rng rng(1);
    const render::Image frame = random_image(16, 16, rng);
    const render::Image crop = extract_crop(frame, full_frame_region(), 16);
    REQUIRE(crop.width() == 16);
    for (std::size_t i = 0; i < frame.size(); ++i) CHECK(crop.data()[i] == doctest::Approx(frame.data()[i]).epsilon(1e-12));
  }

  TEST_CASE("crop outside the frame reads zero, crop of a constant frame is constant") {
    const render::Image ones(20, 20, 1.0);
    const render::Image outside = extract_crop(ones, {3.0, 3.0, 0.5, 0.5}, 8);
    for (double v : outside.data()) CHECK(v == 0.0);
    const render::Image inside = extract_crop(render::Image(20, 20, 0.3), {0.5, 0.5, 0.4, 0.4}, 8);
    for (double v : inside.data()) CHECK(v == doctest::Approx(0.3));
  }

  TEST_CASE("untrained predictions are sorted boxes in [0, 1]") {
    const TrackerWeights w = init_weights(Capacity::sm_lite, 32, 3);
    Rng rng(4);
    for (int i = 0; i < 1000; ++i) {
      const BBox b = predict(w, random_image(32, 32, rng), random_image(32, 32, rng));
      CHECK(b.x_min <= b.x_max);
      CHECK(b.y_min <= b.y_max);
      CHECK(b.valid());
    }
  }

  TEST_CASE("bbox_to_frame maps the search area back into the frame") {
    const CropRegion r{0.5, 0.5, 0.4, 0.4};
    const BBox centre = bbox_to_frame({0.25, 0.25, 0.75, 0.75, BoxFrame::search_relative}, r);
    CHECK(centre.x_min == doctest::Approx(0.4));
    CHECK(centre.y_max == doctest::Approx(0.6));
    CHECK(centre.frame == BoxFrame::frame_relative);
    const BBox clipped = bbox_to_frame({0.0, 0.0, 1.0, 1.0, BoxFrame::search_relative}, {0.1, 0.9, 0.4, 0.4});
    CHECK(clipped.x_min == 0.0);
    CHECK(clipped.y_max == 1.0);
  }

  TEST_CASE("frame_to_search inverts bbox_to_frame inside the region") {
    Rng rng(5);
    for (int i = 0; i < 200; ++i) {
      const CropRegion r{uniform(rng, 0.3, 0.7), uniform(rng, 0.3, 0.7), uniform(rng, 0.1, 0.5), uniform(rng, 0.1, 0.5)};
      const double x0 = uniform(rng, 0.0, 0.5), y0 = uniform(rng, 0.0, 0.5);
      const BBox s{x0, y0, x0 + uniform(rng, 0.0, 0.5), y0 + uniform(rng, 0.0, 0.5), BoxFrame::search_relative};
      const BBox back = frame_to_search(bbox_to_frame(s, r), r);
      CHECK(back.x_min == doctest::Approx(s.x_min).epsilon(1e-9));
      CHECK(back.y_min == doctest::Approx(s.y_min).epsilon(1e-9));
      CHECK(back.x_max == doctest::Approx(s.x_max).epsilon(1e-9));
      CHECK(back.y_max == doctest::Approx(s.y_max).epsilon(1e-9));
    }
  }

  TEST_CASE("dataset synthesis is deterministic with ground truth in range") {
    const attack::SceneDistribution d = attack::SceneDistribution::defaults();
    const TrackingDataset a = synth_tracking_dataset(d, 6, 11, 32);
    const TrackingDataset b = synth_tracking_dataset(d, 6, 11, 32);
    CHECK(a == b);
    CHECK_FALSE(a == synth_tracking_dataset(d, 6, 12, 32));
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a.gt(i).valid());
      CHECK(a.gt(i).frame == BoxFrame::search_relative);
    }
  }

  TEST_CASE("with zero motion the target sits in the centre of the search area") {
    const TrackingDataset d = synth_tracking_dataset(static_distribution(), 8, 13, 32);
    for (std::size_t i = 0; i < d.size(); ++i) {
      const BBox& g = d.gt(i);
      // Boxes that touch the frame border are clipped; skip those.
      if (g.x_min <= 0.0 || g.x_max >= 1.0 || g.y_min <= 0.0 || g.y_max >= 1.0) continue;
      CHECK(g.x_min == doctest::Approx(0.25).epsilon(1e-9));
      CHECK(g.y_min == doctest::Approx(0.25).epsilon(1e-9));
      CHECK(g.x_max == doctest::Approx(0.75).epsilon(1e-9));
      CHECK(g.y_max == doctest::Approx(0.75).epsilon(1e-9));
    }
  }

  TEST_CASE("Sm-lite has fewer parameters than Lg-lite") {
    const TrackerWeights lg = init_weights(Capacity::lg_lite, 64, 1);
    const TrackerWeights sm = init_weights(Capacity::sm_lite, 64, 1);
    CHECK(sm.parameter_count() < lg.parameter_count());
    CHECK(lg.params.size() == kNumParams);
    CHECK_NOTHROW(lg.validate());
    CHECK(parse_capacity("Lg-lite") == Capacity::lg_lite);
    CHECK(parse_capacity("sm_lite") == Capacity::sm_lite);
    CHECK_THROWS_AS(parse_capacity("xl"), ConfigError);
  }

  TEST_CASE("weights survive a save/load round trip exactly") {
    const TrackerWeights w = init_weights(Capacity::sm_lite, 32, 9);
    const auto path = std::filesystem::temp_directory_path() / "pat_weights_roundtrip.patw";
    save_weights(w, path);
    const TrackerWeights back = load_weights(path);
    CHECK(back.capacity == w.capacity);
    CHECK(back.crop_resolution == w.crop_resolution);
    REQUIRE(back.params.size() == w.params.size());
    for (std::size_t i = 0; i < w.params.size(); ++i) CHECK(back.params[i] == w.params[i]);
    std::filesystem::remove(path);
  }

  TEST_CASE("training-loss gradient w.r.t. the search crop matches finite differences") {
    const checks::CompositeCheck c = checks::tracker_composite(31);
    CHECK(c.coordinates == 8 * 8 * 3);
    CHECK(c.result.max_rel_error < 1e-3);
  }

  TEST_CASE("a short training run lowers the loss") {
    const TrackingDataset data = synth_tracking_dataset(attack::SceneDistribution::defaults(), 64, 17, 32);
    TrainConfig cfg;
    cfg.capacity = Capacity::sm_lite;
    cfg.crop_resolution = 32;
    cfg.iterations = 150;
    cfg.batch_size = 16;
    cfg.seed = 3;
    const TrainResult r = train(cfg, data);
    REQUIRE(r.loss_curve.size() == 150);
    double first = 0.0, last = 0.0;
    for (int i = 0; i < 10; ++i) {
      first += r.loss_curve[static_cast<std::size_t>(i)];
      last += r.loss_curve[r.loss_curve.size() - 1 - static_cast<std::size_t>(i)];
    }
    for (double l : r.loss_curve) CHECK(std::isfinite(l));
    CHECK(last < first);
    CHECK(mean_l1(r.weights, data) < mean_l1(init_weights(Capacity::sm_lite, 32, 3), data));
  }

  TEST_CASE("non-finite loss raises DivergenceError") {
    TrackingDataset data(32);
    const render::Image img(32, 32, 0.5);
    data.add(img, img, {0.25, 0.25, NAN, 0.75, BoxFrame::search_relative});
    TrainConfig cfg;
    cfg.capacity = Capacity::sm_lite;
    cfg.crop_resolution = 32;
    cfg.iterations = 5;
    cfg.batch_size = 1;
    CHECK_THROWS_AS(train(cfg, data), DivergenceError);
  }

  TEST_CASE("invalid training config is rejected") {
    TrainConfig cfg;
    cfg.batch_size = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    TrainConfig lr;
    CHECK(lr.learning_rate_at(1) == lr.learning_rate);
    CHECK(lr.learning_rate_at(1501) == doctest::Approx(0.5 * lr.learning_rate));
  }
}
