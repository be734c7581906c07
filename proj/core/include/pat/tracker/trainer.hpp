#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "pat/tracker/dataset.hpp"
#include "pat/tracker/network.hpp"

namespace pat::tracker {

struct TrainConfig {
  Capacity capacity = Capacity::lg_lite;
  int iterations = 5000;
  int batch_size = 32;
  double learning_rate = 1e-3;
  int lr_halve_every = 1500;  // learning rate halves every this many iterations
  int crop_resolution = 64;
  bool flip_augment = true;
  std::uint64_t seed = 1;

  void validate() const;
  double learning_rate_at(int iteration) const;
};

struct TrainResult {
  TrackerWeights weights;
  std::vector<double> loss_curve;  // minibatch mean L1 per iteration
};

using TrainProgress = std::function<void(int iteration, double loss)>;

// Adam on the mean L1 between predicted and true search-relative boxes.
// Throws DivergenceError naming the iteration if the loss turns non-finite.
TrainResult train(const TrainConfig& config, const TrackingDataset& data, const TrainProgress& progress = {});

std::vector<BBox> predict_dataset(const TrackerWeights& weights, const TrackingDataset& data);
double mean_l1(const TrackerWeights& weights, const TrackingDataset& data);
double mean_iou(const TrackerWeights& weights, const TrackingDataset& data);

}  // namespace pat::tracker
