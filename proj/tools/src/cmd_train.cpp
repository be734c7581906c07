#include <chrono>
#include <cstdio>

#include <fmt/format.h>

#include "commands.hpp"
#include "pat/csv.hpp"
#include "pat/error.hpp"
#include "pat/tracker/trainer.hpp"
#include "pat/tracker/weights_io.hpp"
#include "svg_chart.hpp"

namespace pat::cli {

int cmd_train(RunContext& run) {
  const Config& c = run.config();
  const tracker::TrainConfig tc = train_config_from(c);
  const attack::SceneDistribution dist = scene_distribution_from(c);
  const int n_pairs = c.get_int("train.pairs");
  const int n_val = c.get_int("train.val_pairs");
  if (n_pairs < 1 || n_val < 1) throw ConfigError("train.pairs and train.val_pairs must be >= 1");

  const auto t0 = std::chrono::steady_clock::now();
  const tracker::TrackingDataset data =
      tracker::synth_tracking_dataset(dist, n_pairs, derive_seed(run.seed(), 2), tc.crop_resolution);
  const tracker::TrackingDataset val =
      tracker::synth_tracking_dataset(dist, n_val, c.get_u64("train.val_seed"), tc.crop_resolution);
  fmt::print("dataset: {} training pairs, {} held-out pairs ({:.1f}s)\n", data.size(), val.size(),
             std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());

  CsvWriter loss_csv(run.out("loss.csv"), {"iteration", "loss", "learning_rate"});
  const int every = std::max(1, tc.iterations / 20);
  const tracker::TrainResult result = tracker::train(tc, data, [&](int it, double loss) {
    loss_csv.write(it, loss, tc.learning_rate_at(it));
    if (it % every == 0 || it == tc.iterations) {
      fmt::print("iter {:>6}  loss {:.4f}\n", it, loss);
      std::fflush(stdout);
    }
  });
  run.artifact("loss_csv", run.out("loss.csv"));

  tracker::save_weights(result.weights, run.out("weights.patw"));
  run.artifact("weights", run.out("weights.patw"));

  Series s{"minibatch L1", {}, {}};
  for (std::size_t i = 0; i < result.loss_curve.size(); ++i) {
    s.x.push_back(static_cast<double>(i + 1));
    s.y.push_back(result.loss_curve[i]);
  }
  write_svg_chart(run.out("loss.svg"), "Training loss", "iteration", "mean L1", {s});
  run.artifact("loss_svg", run.out("loss.svg"));

  const double val_iou = tracker::mean_iou(result.weights, val);
  const double val_l1 = tracker::mean_l1(result.weights, val);
  fmt::print("{} parameters: {}\n", tracker::capacity_name(tc.capacity), result.weights.parameter_count());
  fmt::print("held-out mean IOU {:.4f}, mean L1 {:.4f} over {} pairs\n", val_iou, val_l1, val.size());
  run.result("val_mean_iou", fmt::format("{:.6f}", val_iou));
  run.result("val_mean_l1", fmt::format("{:.6f}", val_l1));
  run.result("parameters", std::to_string(result.weights.parameter_count()));
  return 0;
}

}  // namespace pat::cli
