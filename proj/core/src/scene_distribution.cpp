#include "pat/attack/scene_distribution.hpp"

#include <fmt/format.h>

#include "pat/error.hpp"

namespace pat::attack {

using render::Pose6D;

bool PoseRanges::contains(const Pose6D& p) const {
  return x.contains(p.x) && y.contains(p.y) && z.contains(p.z) && roll.contains(p.roll) && pitch.contains(p.pitch) &&
         yaw.contains(p.yaw);
}

bool PoseRanges::is_point() const {
  for (const Range* r : {&x, &y, &z, &roll, &pitch, &yaw}) {
    if (r->min != r->max) return false;
  }
  return true;
}

SceneDistribution SceneDistribution::defaults() {
  SceneDistribution d;
  d.camera_init = {{-1.5, 1.5}, {-11.0, -6.0}, {0.6, 1.8}, {0.0, 0.0}, {-5.0, 5.0}, {-15.0, 15.0}};
  d.camera_delta = {{-0.1, 0.1}, {-0.5, 0.5}, {-0.1, 0.1}, {0.0, 0.0}, {-3.0, 3.0}, {-3.0, 3.0}};
  d.target_init = {{-1.4, 1.4}, {-5.0, -0.7}, {0.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}, {0.0, 180.0}};
  d.target_delta = {{-0.1, 0.1}, {-0.1, 0.1}, {0.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}, {-10.0, 10.0}};
  d.backgrounds = {render::Background::school, render::Background::forest};
  d.targets = {render::TargetIdentity::green_person, render::TargetIdentity::pr2};
  return d;
}

namespace {

void check_range(const Range& r, const char* group, const char* row) {
  if (!(r.min <= r.max)) throw ConfigError(fmt::format("{}.{}: min {} exceeds max {}", group, row, r.min, r.max));
}

void check_pose(const PoseRanges& p, const char* group) {
  check_range(p.x, group, "x");
  check_range(p.y, group, "y");
  check_range(p.z, group, "z");
  check_range(p.roll, group, "roll");
  check_range(p.pitch, group, "pitch");
  check_range(p.yaw, group, "yaw");
}

Pose6D draw_pose(const PoseRanges& r, Rng& rng) {
  Pose6D p;
  p.x = uniform(rng, r.x.min, r.x.max);
  p.y = uniform(rng, r.y.min, r.y.max);
  p.z = uniform(rng, r.z.min, r.z.max);
  p.roll = uniform(rng, r.roll.min, r.roll.max);
  p.pitch = uniform(rng, r.pitch.min, r.pitch.max);
  p.yaw = uniform(rng, r.yaw.min, r.yaw.max);
  return p;
}

}  // namespace

void SceneDistribution::validate() const {
  check_pose(camera_init, "camera.init");
  check_pose(camera_delta, "camera.delta");
  check_pose(target_init, "target.init");
  check_pose(target_delta, "target.delta");
  check_range(hue, "light", "hue");
  check_range(saturation, "light", "saturation");
  check_range(value, "light", "value");
  if (hue.min < 0.0 || hue.max > 360.0) throw ConfigError("light.hue must lie in [0, 360]");
  if (saturation.min < 0.0 || saturation.max > 1.0) throw ConfigError("light.saturation must lie in [0, 1]");
  if (value.min < 0.0 || value.max > 1.0) throw ConfigError("light.value must lie in [0, 1]");
  if (backgrounds.empty()) throw ConfigError("scene.backgrounds must not be empty");
  if (targets.empty()) throw ConfigError("scene.targets must not be empty");
  if (!(ambient_fraction >= 0.0 && ambient_fraction <= 1.0)) throw ConfigError("light.ambient_fraction must lie in [0, 1]");
  render::CameraModel cam;
  cam.horizontal_fov = horizontal_fov;
  cam.frame_width = frame_width;
  cam.frame_height = frame_height;
  cam.validate();
  poster.validate();
}

ScenePair sample_scene_pair(const SceneDistribution& dist, Rng& rng) {
  ScenePair pair;
  render::SceneSpec& prev = pair.previous;
  prev.camera.pose = draw_pose(dist.camera_init, rng);
  prev.camera.horizontal_fov = dist.horizontal_fov;
  prev.camera.frame_width = dist.frame_width;
  prev.camera.frame_height = dist.frame_height;
  prev.poster = dist.poster;
  prev.sprite.pose = draw_pose(dist.target_init, rng);
  prev.light.hue = uniform(rng, dist.hue.min, dist.hue.max);
  prev.light.saturation = uniform(rng, dist.saturation.min, dist.saturation.max);
  prev.light.value = uniform(rng, dist.value.min, dist.value.max);
  prev.background = dist.backgrounds[uniform_index(rng, dist.backgrounds.size())];
  prev.sprite.identity = dist.targets[uniform_index(rng, dist.targets.size())];
  prev.sprite.height_m = render::default_height_m(prev.sprite.identity);
  prev.ambient_fraction = dist.ambient_fraction;

  pair.camera_delta = draw_pose(dist.camera_delta, rng);
  pair.target_delta = draw_pose(dist.target_delta, rng);
  pair.current = prev;
  pair.current.camera.pose = prev.camera.pose + pair.camera_delta;
  pair.current.sprite.pose = prev.sprite.pose + pair.target_delta;
  return pair;
}

RenderedPair render_pair(const ScenePair& pair, const render::Texture& texture) {
  return {render::render_scene(pair.previous, texture), render::render_scene(pair.current, texture)};
}

}  // namespace pat::attack
