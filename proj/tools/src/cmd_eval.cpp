#include <cstdio>
#include <numeric>

#include <fmt/format.h>

#include "commands.hpp"
#include "pat/csv.hpp"
#include "pat/error.hpp"
#include "pat/eval/metrics.hpp"
#include "pat/eval/sequence.hpp"
#include "pat/eval/servo.hpp"
#include "svg_chart.hpp"

namespace pat::cli {

namespace fs = std::filesystem;

namespace {

std::string join(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += fmt::format("{}{:.6f}", i ? ";" : "", v[i]);
  return out;
}

double mean(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

void annotate(render::Image frame, const BBox& gt, const BBox* pred, const fs::path& path) {
  render::draw_box(frame, gt.x_min, gt.y_min, gt.x_max, gt.y_max, {0.0, 1.0, 0.0});
  if (pred) render::draw_box(frame, pred->x_min, pred->y_min, pred->x_max, pred->y_max, {1.0, 0.0, 0.0});
  render::save_png(frame, path);
}

}  // namespace

int cmd_eval(RunContext& run, bool dump_frames) {
  const Config& c = run.config();
  const tracker::TrackerWeights weights = run.load_weights();
  const attack::SceneDistribution dist = scene_distribution_from(c);
  const int res = dist.poster.texture_resolution;
  const render::Texture texture = run.load_texture("input.texture", res, derive_seed(run.seed(), 3));
  const render::Texture source = run.load_texture("input.source", res, derive_seed(run.seed(), 4));
  const eval::TraversalOptions topts = traversal_options_from(c);
  const int n_pairs = c.get_int("eval.pairs");

  const eval::EvalReport report = eval::evaluate_texture(texture, source, weights, dist, n_pairs, run.seed(), topts);

  CsvWriter csv(run.out("report.csv"),
                {"pair", "mu_ioud", "mean_iou_inert", "mean_iou_adv", "iou_inert", "iou_adv"});
  for (std::size_t p = 0; p < report.pairs.size(); ++p) {
    const eval::PairReport& r = report.pairs[p];
    csv.write(p, r.mu_ioud, mean(r.iou_inert), mean(r.iou_adv), join(r.iou_inert), join(r.iou_adv));
  }
  run.artifact("report_csv", run.out("report.csv"));
  {
    std::FILE* f = std::fopen(run.out("summary.txt").c_str(), "w");
    if (!f) throw Error(fmt::format("{}: cannot write", run.out("summary.txt").string()));
    fmt::print(f, "pairs={}\nmean_mu_ioud={:.17g}\n", report.pairs.size(), report.mean_mu_ioud);
    std::fclose(f);
  }
  run.artifact("summary", run.out("summary.txt"));
  run.result("mean_mu_ioud", fmt::format("{:.6f}", report.mean_mu_ioud));
  fmt::print("mean muIOUd {:.4f} over {} sequence pairs\n", report.mean_mu_ioud, report.pairs.size());

  if (dump_frames) {
    Rng rng(derive_seed(run.seed(), 0));
    const eval::EvalSequencePair seq =
        eval::make_sequence_pair(eval::traversal_script(dist, rng, topts), texture, source);
    const eval::TrackResult inert = eval::track_sequence(weights, seq.frames_inert, seq.gt.front());
    const eval::TrackResult adv = eval::track_sequence(weights, seq.frames_adv, seq.gt.front());
    fs::create_directories(run.out("frames"));
    for (std::size_t j = 0; j < seq.gt.size(); ++j) {
      const BBox* pi = j ? &inert.boxes[j - 1] : nullptr;
      const BBox* pa = j ? &adv.boxes[j - 1] : nullptr;
      annotate(seq.frames_inert[j], seq.gt[j], pi, run.out(fmt::format("frames/inert_{:03d}.png", j)));
      annotate(seq.frames_adv[j], seq.gt[j], pa, run.out(fmt::format("frames/adv_{:03d}.png", j)));
    }
    run.artifact("frames", run.out("frames"));
  }
  return 0;
}

int cmd_servo(RunContext& run) {
  const Config& c = run.config();
  const tracker::TrackerWeights weights = run.load_weights();
  const render::SceneSpec scene = servo_scene_from(c);
  const eval::ServoConfig sc = servo_config_from(c);
  const std::string& tex_spec = c.get("input.texture");
  const render::Texture texture = tex_spec.empty()
                                      ? render::Texture(scene.poster.texture_resolution,
                                                        scene.poster.texture_resolution, 0.5)
                                      : run.load_texture("input.texture", scene.poster.texture_resolution,
                                                         derive_seed(run.seed(), 5));

  const eval::ServoResult r = eval::servo_sim(weights, scene, texture, sc);

  CsvWriter csv(run.out("trajectory.csv"), {"step", "camera_x", "camera_y", "camera_z", "target_x", "target_y",
                                            "pred_x_min", "pred_y_min", "pred_x_max", "pred_y_max", "gt_visible",
                                            "iou"});
  Series iou{"IOU", {}, {}};
  for (const eval::ServoStep& s : r.trajectory) {
    csv.write(s.step, s.camera.x, s.camera.y, s.camera.z, s.target.x, s.target.y, s.pred.x_min, s.pred.y_min,
              s.pred.x_max, s.pred.y_max, s.gt ? 1 : 0, s.iou);
    iou.x.push_back(s.step);
    iou.y.push_back(s.iou);
  }
  run.artifact("trajectory_csv", run.out("trajectory.csv"));
  write_svg_chart(run.out("iou.svg"), "Servo tracking", "step", "IOU", {iou});
  run.artifact("iou_svg", run.out("iou.svg"));
  run.result("steps", std::to_string(r.trajectory.size()));
  run.result("breakaway", r.breakaway ? "true" : "false");
  run.result("terminated", r.terminated ? "true" : "false");
  fmt::print("{} steps, breakaway {}{}\n", r.trajectory.size(), r.breakaway ? "yes" : "no",
             r.terminated ? fmt::format(", terminated: {}", r.termination_reason) : std::string());
  return 0;
}

}  // namespace pat::cli
