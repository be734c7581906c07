#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pat/attack/scene_distribution.hpp"
#include "pat/tracker/network.hpp"

namespace pat::eval {

struct TraversalOptions {
  int n_frames = 30;
  // Per-frame camera jitter, as a fraction of the distribution's camera deltas.
  double camera_jitter = 0.2;
  int max_attempts = 50;
};

// Target walks at constant speed across the poster width (left edge to
// right edge) with per-frame yaw jitter drawn from the target yaw delta.
// The camera holds its initial draw plus small per-frame jitter. Scripts are
// redrawn until the target is visible in every frame.
std::vector<render::SceneSpec> traversal_script(const attack::SceneDistribution& dist, Rng& rng,
                                                const TraversalOptions& options = {});

struct EvalSequencePair {
  std::vector<render::SceneSpec> script;
  std::vector<render::Image> frames_adv;
  std::vector<render::Image> frames_inert;
  std::vector<BBox> gt;  // frame-relative, one per frame
};

EvalSequencePair make_sequence_pair(std::vector<render::SceneSpec> script, const render::Texture& adversarial,
                                    const render::Texture& inert);

struct TrackResult {
  std::vector<BBox> boxes;                // N - 1 frame-relative predictions
  std::vector<std::string> events;        // region fallbacks
};

// Chained tracking: the crop region for frame j comes from the prediction at
// frame j - 1 (ground truth for the first frame). A degenerate prediction
// keeps the last valid region.
TrackResult track_sequence(const tracker::TrackerWeights& weights, std::span<const render::Image> frames,
                           const BBox& init_bbox);

struct PairReport {
  double mu_ioud = 0.0;
  std::vector<double> iou_inert;  // frames 2..N
  std::vector<double> iou_adv;
};

struct EvalReport {
  double mean_mu_ioud = 0.0;
  std::vector<PairReport> pairs;
};

// n_pairs sequence pairs, pair p drawn from sub-seed derive_seed(seed, p).
EvalReport evaluate_texture(const render::Texture& texture, const render::Texture& source,
                            const tracker::TrackerWeights& weights, const attack::SceneDistribution& dist,
                            int n_pairs = 20, std::uint64_t seed = 2024, const TraversalOptions& options = {});

}  // namespace pat::eval
