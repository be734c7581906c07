#include "pat/eval/sequence.hpp"

#include <fmt/format.h>

#include "pat/error.hpp"
#include "pat/eval/metrics.hpp"

namespace pat::eval {

using render::Pose6D;

namespace {

double jitter(const attack::Range& r, double scale, Rng& rng) { return scale * uniform(rng, r.min, r.max); }

bool degenerate(const BBox& b) { return !(b.width() > 1e-6) || !(b.height() > 1e-6); }

}  // namespace

std::vector<render::SceneSpec> traversal_script(const attack::SceneDistribution& dist, Rng& rng,
                                                const TraversalOptions& options) {
  if (options.n_frames < 2) throw ConfigError(fmt::format("sequence length {} must be >= 2", options.n_frames));
  dist.validate();
  const double half = 0.5 * dist.poster.width_m;
  const double x0 = dist.poster.pose.x - half;

  for (int attempt = 0; attempt < options.max_attempts; ++attempt) {
    // A full scene draw supplies the shared camera, light, identity and background.
    const attack::ScenePair base = attack::sample_scene_pair(dist, rng);
    std::vector<render::SceneSpec> script;
    script.reserve(static_cast<std::size_t>(options.n_frames));
    bool visible = true;
    const auto& cd = dist.camera_delta;
    for (int j = 0; j < options.n_frames && visible; ++j) {
      render::SceneSpec s = base.previous;
      const double t = static_cast<double>(j) / (options.n_frames - 1);
      s.sprite.pose.x = x0 + 2.0 * half * t;
      s.sprite.pose.yaw = base.previous.sprite.pose.yaw + uniform(rng, dist.target_delta.yaw.min, dist.target_delta.yaw.max);
      const double sc = options.camera_jitter;
      s.camera.pose = s.camera.pose + Pose6D{jitter(cd.x, sc, rng),    jitter(cd.y, sc, rng),     jitter(cd.z, sc, rng),
                                             jitter(cd.roll, sc, rng), jitter(cd.pitch, sc, rng), jitter(cd.yaw, sc, rng)};
      try {
        // Only visibility matters here; any texture will do.
        const render::Texture probe(4, 4, 0.5);
        visible = render::render_scene(s, probe).gt_bbox.has_value();
      } catch (const DegenerateViewError&) {
        visible = false;
      }
      script.push_back(s);
    }
    if (visible) return script;
  }
  throw ConfigError(fmt::format("no fully visible traversal after {} attempts; check the scene ranges",
                                options.max_attempts));
}

EvalSequencePair make_sequence_pair(std::vector<render::SceneSpec> script, const render::Texture& adversarial,
                                    const render::Texture& inert) {
  if (script.size() < 2) throw ConfigError("sequence needs at least two frames");
  EvalSequencePair pair;
  for (const render::SceneSpec& s : script) {
    render::RenderOutput adv = render::render_scene(s, adversarial);
    render::RenderOutput ine = render::render_scene(s, inert);
    if (!ine.gt_bbox) throw Error("make_sequence_pair: target not visible in a scripted frame");
    pair.gt.push_back(*ine.gt_bbox);
    pair.frames_adv.push_back(std::move(adv.frame));
    pair.frames_inert.push_back(std::move(ine.frame));
  }
  pair.script = std::move(script);
  return pair;
}

TrackResult track_sequence(const tracker::TrackerWeights& weights, std::span<const render::Image> frames,
                           const BBox& init_bbox) {
  if (frames.size() < 2) throw ConfigError(fmt::format("track_sequence: {} frames, need >= 2", frames.size()));
  TrackResult out;
  tracker::CropRegion region = tracker::crop_region_from_bbox(init_bbox);
  const int r = weights.crop_resolution;
  for (std::size_t j = 1; j < frames.size(); ++j) {
    const render::Image templ = tracker::extract_crop(frames[j - 1], region, r);
    const render::Image search = tracker::extract_crop(frames[j], region, r);
    const BBox pred = tracker::bbox_to_frame(tracker::predict(weights, templ, search), region);
    out.boxes.push_back(pred);
    if (degenerate(pred)) {
      out.events.push_back(fmt::format("frame {}: degenerate prediction {}, keeping previous region", j + 1, pred.str()));
    } else {
      region = tracker::crop_region_from_bbox(pred);
    }
  }
  return out;
}

EvalReport evaluate_texture(const render::Texture& texture, const render::Texture& source,
                            const tracker::TrackerWeights& weights, const attack::SceneDistribution& dist, int n_pairs,
                            std::uint64_t seed, const TraversalOptions& options) {
  if (n_pairs <= 0) throw ConfigError(fmt::format("evaluation pairs {} must be positive", n_pairs));
  EvalReport report;
  double sum = 0.0;
  for (int p = 0; p < n_pairs; ++p) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(p)));
    const EvalSequencePair seq = make_sequence_pair(traversal_script(dist, rng, options), texture, source);
    const TrackResult inert = track_sequence(weights, seq.frames_inert, seq.gt.front());
    const TrackResult adv = track_sequence(weights, seq.frames_adv, seq.gt.front());
    const std::span<const BBox> gt(seq.gt.data() + 1, seq.gt.size() - 1);
    PairReport pr;
    for (std::size_t j = 0; j < gt.size(); ++j) {
      pr.iou_inert.push_back(iou(inert.boxes[j], gt[j]));
      pr.iou_adv.push_back(iou(adv.boxes[j], gt[j]));
    }
    pr.mu_ioud = mu_ioud(inert.boxes, adv.boxes, gt);
    sum += pr.mu_ioud;
    report.pairs.push_back(std::move(pr));
  }
  report.mean_mu_ioud = sum / n_pairs;
  return report;
}

}  // namespace pat::eval
