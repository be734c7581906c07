#pragma once

#include <vector>

#include "pat/render/renderer.hpp"
#include "pat/rng.hpp"

namespace pat::attack {

struct Range {
  double min = 0.0;
  double max = 0.0;

  double mid() const { return 0.5 * (min + max); }
  bool contains(double v) const { return v >= min && v <= max; }
  static Range point(double v) { return {v, v}; }
  friend bool operator==(const Range&, const Range&) = default;
};

struct PoseRanges {
  Range x, y, z, roll, pitch, yaw;

  bool contains(const render::Pose6D& p) const;
  // Every row collapsed to a single value.
  bool is_point() const;
  friend bool operator==(const PoseRanges&, const PoseRanges&) = default;
};

// EOT scene distribution. Angles in degrees, distances in metres; deltas are
// added to the previous-frame pose to form the current frame.
struct SceneDistribution {
  PoseRanges camera_init;
  PoseRanges camera_delta;
  PoseRanges target_init;
  PoseRanges target_delta;
  Range hue{0.0, 360.0};
  Range saturation{0.0, 0.2};
  Range value{0.1, 0.7};
  std::vector<render::Background> backgrounds;
  std::vector<render::TargetIdentity> targets;

  render::PosterSpec poster;
  double horizontal_fov = 60.0;
  int frame_width = 128;
  int frame_height = 128;
  double ambient_fraction = 0.2;

  static SceneDistribution defaults();
  // Throws ConfigError on min > max, empty sets or invalid camera/poster.
  void validate() const;
};

struct ScenePair {
  render::SceneSpec previous;
  render::SceneSpec current;
  render::Pose6D camera_delta;
  render::Pose6D target_delta;
};

// Draws every continuous variable uniformly (one draw per variable, in a
// fixed order) and every discrete variable uniformly from its set.
ScenePair sample_scene_pair(const SceneDistribution& dist, Rng& rng);

struct RenderedPair {
  render::RenderOutput previous;
  render::RenderOutput current;
};

RenderedPair render_pair(const ScenePair& pair, const render::Texture& texture);

}  // namespace pat::attack
