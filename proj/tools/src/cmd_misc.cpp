#include <fmt/format.h>

#include "commands.hpp"
#include "pat/attack/scene_distribution.hpp"
#include "pat/checks.hpp"
#include "pat/csv.hpp"
#include "pat/error.hpp"
#include "pat/render/textures.hpp"
#include "pat/tracker/network.hpp"

namespace pat::cli {

int cmd_gradcheck(RunContext& run) {
  CsvWriter csv(run.out("gradcheck.csv"),
                {"composite", "coordinates", "max_rel_error", "worst_index", "analytic", "numeric", "nudged",
                 "seconds", "passed"});
  bool ok = true;
  for (const checks::CompositeCheck& c : checks::gradcheck_suite(run.seed())) {
    const auto& r = c.result;
    fmt::print("{:<9} {:>4} coords  max rel error {:.3e}  ({} nudged, {:.2f}s)  {}\n", c.name, c.coordinates,
               r.max_rel_error, r.nudged, c.seconds, c.passed() ? "PASS" : "FAIL");
    csv.write(c.name, c.coordinates, r.max_rel_error, r.worst_index, r.analytic_at_worst, r.numeric_at_worst,
              r.nudged, c.seconds, c.passed() ? 1 : 0);
    run.result(fmt::format("max_rel_error.{}", c.name), fmt::format("{:.3e}", r.max_rel_error));
    ok = ok && c.passed();
  }
  run.artifact("gradcheck_csv", run.out("gradcheck.csv"));
  fmt::print("tolerance {:.0e}: {}\n", checks::kGradTolerance, ok ? "all composites pass" : "FAILED");
  return ok ? 0 : 1;
}

int cmd_preview(RunContext& run) {
  const Config& c = run.config();
  const attack::SceneDistribution dist = scene_distribution_from(c);
  const int count = c.get_int("preview.count");
  const int res = dist.poster.texture_resolution;
  const render::Texture texture = c.get("input.texture").empty()
                                      ? [&] {
                                          Rng rng(derive_seed(run.seed(), 6));
                                          return render::inert_texture(res, rng);
                                        }()
                                      : run.load_texture("input.texture", res, derive_seed(run.seed(), 6));
  const int crop = c.get_int("train.crop_resolution");

  CsvWriter csv(run.out("scenes.csv"),
                {"index", "identity", "background", "camera_x", "camera_y", "camera_z", "camera_yaw", "target_x",
                 "target_y", "target_yaw", "hue", "saturation", "value", "gt_prev", "gt_cur"});
  Rng rng(run.seed());
  for (int i = 0; i < count; ++i) {
    const attack::ScenePair pair = attack::sample_scene_pair(dist, rng);
    attack::RenderedPair frames;
    try {
      frames = attack::render_pair(pair, texture);
    } catch (const DegenerateViewError& e) {
      fmt::print("scene {}: {}\n", i, e.what());
      continue;
    }
    const auto& s = pair.previous;
    auto box_str = [](const std::optional<BBox>& b) { return b ? b->str() : std::string("absent"); };
    csv.write(i, render::identity_name(s.sprite.identity), render::background_name(s.background), s.camera.pose.x,
              s.camera.pose.y, s.camera.pose.z, s.camera.pose.yaw, s.sprite.pose.x, s.sprite.pose.y,
              s.sprite.pose.yaw, s.light.hue, s.light.saturation, s.light.value, box_str(frames.previous.gt_bbox),
              box_str(frames.current.gt_bbox));
    for (auto [tag, out] : {std::pair{"prev", &frames.previous}, std::pair{"cur", &frames.current}}) {
      render::Image f = out->frame;
      if (out->gt_bbox) render::draw_box(f, out->gt_bbox->x_min, out->gt_bbox->y_min, out->gt_bbox->x_max,
                                         out->gt_bbox->y_max, {0.0, 1.0, 0.0});
      render::save_png(f, run.out(fmt::format("scene_{:02d}_{}.png", i, tag)));
    }
    if (frames.previous.gt_bbox) {
      const tracker::CropRegion region = tracker::crop_region_from_bbox(*frames.previous.gt_bbox);
      render::save_png(tracker::extract_crop(frames.previous.frame, region, crop),
                       run.out(fmt::format("scene_{:02d}_template.png", i)));
      render::save_png(tracker::extract_crop(frames.current.frame, region, crop),
                       run.out(fmt::format("scene_{:02d}_search.png", i)));
    }
  }
  render::save_png(texture, run.out("texture.png"));
  run.artifact("scenes_csv", run.out("scenes.csv"));
  run.artifact("texture", run.out("texture.png"));
  fmt::print("wrote {} scene previews to {}\n", count, run.out_dir().string());
  return 0;
}

}  // namespace pat::cli
