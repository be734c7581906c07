#include "pat/tracker/trainer.hpp"

#include <cmath>

#include <fmt/format.h>

#include "pat/error.hpp"
#include "pat/eval/metrics.hpp"
#include "pat/rng.hpp"

namespace pat::tracker {

using diff::Tape;
using diff::Tensor;
using diff::Var;

void TrainConfig::validate() const {
  if (iterations < 0) throw ConfigError(fmt::format("train.iterations {} must be >= 0", iterations));
  if (batch_size <= 0) throw ConfigError(fmt::format("train.batch_size {} must be positive", batch_size));
  if (!(learning_rate > 0.0)) throw ConfigError(fmt::format("train.learning_rate {} must be positive", learning_rate));
  if (lr_halve_every <= 0) throw ConfigError(fmt::format("train.lr_halve_every {} must be positive", lr_halve_every));
}

double TrainConfig::learning_rate_at(int iteration) const {
  return learning_rate * std::ldexp(1.0, -(iteration / lr_halve_every));
}

TrainResult train(const TrainConfig& config, const TrackingDataset& data, const TrainProgress& progress) {
  config.validate();
  if (data.empty()) throw ConfigError("train: dataset is empty");
  if (data.resolution() != config.crop_resolution) {
    throw ConfigError(fmt::format("train: dataset resolution {} differs from crop resolution {}", data.resolution(),
                                  config.crop_resolution));
  }
  TrainResult result;
  result.weights = init_weights(config.capacity, config.crop_resolution, derive_seed(config.seed, 0));
  const auto arch = result.weights.arch();
  auto& params = result.weights.params;

  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  std::vector<Tensor> m, v;
  for (const Tensor& p : params) {
    m.emplace_back(p.shape(), 0.0);
    v.emplace_back(p.shape(), 0.0);
  }

  Rng rng(derive_seed(config.seed, 1));
  std::vector<std::size_t> idx(static_cast<std::size_t>(config.batch_size));
  std::vector<std::uint8_t> flip(idx.size(), 0);
  Tensor tb, sb, gb;
  result.loss_curve.reserve(static_cast<std::size_t>(config.iterations));

  for (int it = 0; it < config.iterations; ++it) {
    for (std::size_t k = 0; k < idx.size(); ++k) {
      idx[k] = uniform_index(rng, data.size());
      flip[k] = config.flip_augment ? static_cast<std::uint8_t>(uniform_index(rng, 2)) : 0;
    }
    data.fill_batch(idx, flip, tb, sb, gb);

    Tape tape;
    const auto pv = bind_weights(tape, result.weights, true);
    const Var pred = forward(tape, arch, pv, tape.leaf(tb), tape.leaf(sb));
    const Var loss = tape.mean(tape.abs(tape.sub(pred, tape.leaf(gb))));
    const double lv = tape.value(loss).item();
    if (!std::isfinite(lv)) {
      throw DivergenceError(fmt::format("training diverged: loss is {} at iteration {}", lv, it + 1), it + 1);
    }
    result.loss_curve.push_back(lv);
    const diff::Gradients grads = tape.backward(loss);

    const double lr = config.learning_rate_at(it);
    const double bc1 = 1.0 - std::pow(kBeta1, it + 1), bc2 = 1.0 - std::pow(kBeta2, it + 1);
    for (std::size_t i = 0; i < params.size(); ++i) {
      const Tensor& g = grads[pv[i]];
      double* p = params[i].ptr();
      double* mi = m[i].ptr();
      double* vi = v[i].ptr();
      for (std::size_t k = 0; k < g.size(); ++k) {
        mi[k] = kBeta1 * mi[k] + (1.0 - kBeta1) * g[k];
        vi[k] = kBeta2 * vi[k] + (1.0 - kBeta2) * g[k] * g[k];
        p[k] -= lr * (mi[k] / bc1) / (std::sqrt(vi[k] / bc2) + kEps);
      }
    }
    if (progress) progress(it + 1, lv);
  }
  return result;
}

std::vector<BBox> predict_dataset(const TrackerWeights& weights, const TrackingDataset& data) {
  if (data.resolution() != weights.crop_resolution) {
    throw ShapeError(fmt::format("predict_dataset: dataset resolution {} differs from tracker resolution {}",
                                 data.resolution(), weights.crop_resolution));
  }
  constexpr std::size_t kChunk = 64;
  std::vector<BBox> out;
  out.reserve(data.size());
  Tensor tb, sb, gb;
  for (std::size_t start = 0; start < data.size(); start += kChunk) {
    const std::size_t n = std::min(kChunk, data.size() - start);
    std::vector<std::size_t> idx(n);
    for (std::size_t k = 0; k < n; ++k) idx[k] = start + k;
    const std::vector<std::uint8_t> flip(n, 0);
    data.fill_batch(idx, flip, tb, sb, gb);
    Tape tape;
    const auto pv = bind_weights(tape, weights, false);
    const Tensor& pred = tape.value(forward(tape, weights.arch(), pv, tape.leaf(tb), tape.leaf(sb)));
    for (std::size_t k = 0; k < n; ++k) {
      out.push_back({pred[k * 4], pred[k * 4 + 1], pred[k * 4 + 2], pred[k * 4 + 3], BoxFrame::search_relative});
    }
  }
  return out;
}

double mean_l1(const TrackerWeights& weights, const TrackingDataset& data) {
  const auto pred = predict_dataset(weights, data);
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const BBox& g = data.gt(i);
    s += std::fabs(pred[i].x_min - g.x_min) + std::fabs(pred[i].y_min - g.y_min) + std::fabs(pred[i].x_max - g.x_max) +
         std::fabs(pred[i].y_max - g.y_max);
  }
  return s / (4.0 * static_cast<double>(pred.size()));
}

double mean_iou(const TrackerWeights& weights, const TrackingDataset& data) {
  const auto pred = predict_dataset(weights, data);
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) s += eval::iou(pred[i], data.gt(i));
  return s / static_cast<double>(pred.size());
}

}  // namespace pat::tracker
