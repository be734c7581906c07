#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pat/attack/scene_distribution.hpp"
#include "pat/bbox.hpp"
#include "pat/diff/tensor.hpp"
#include "pat/render/image.hpp"

namespace pat::tracker {

// (template, search, ground truth) triples. Crops are kept 8-bit quantized
// in planar layout to keep large datasets in memory.
class TrackingDataset {
 public:
  explicit TrackingDataset(int resolution);

  int resolution() const { return resolution_; }
  std::size_t size() const { return gt_.size(); }
  bool empty() const { return gt_.empty(); }

  void add(const render::Image& templ, const render::Image& search, const BBox& gt);

  render::Image template_image(std::size_t i) const;
  render::Image search_image(std::size_t i) const;
  const BBox& gt(std::size_t i) const { return gt_.at(i); }

  // Fills templ/search [N,3,R,R] and gt [N,4]. flip[k] mirrors sample k
  // horizontally (crops and box).
  void fill_batch(std::span<const std::size_t> indices, std::span<const std::uint8_t> flip, diff::Tensor& templ,
                  diff::Tensor& search, diff::Tensor& gt) const;

  friend bool operator==(const TrackingDataset&, const TrackingDataset&) = default;

 private:
  render::Image unpack(const std::vector<std::uint8_t>& store, std::size_t i) const;

  int resolution_;
  std::vector<std::uint8_t> templ_;
  std::vector<std::uint8_t> search_;
  std::vector<BBox> gt_;
};

// Each pair comes from its own sub-seed: an independent ScenePair rendered
// with an inert texture, cropped around the previous ground-truth box.
TrackingDataset synth_tracking_dataset(const attack::SceneDistribution& dist, int n_pairs, std::uint64_t seed,
                                       int resolution = 64);

}  // namespace pat::tracker
