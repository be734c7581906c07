#pragma once

#include <span>
#include <string_view>

#include "pat/attack/scene_distribution.hpp"

namespace pat::attack {

// -bg, +bg, -target, +target, -light, +light, small_poster, -cam_pose,
// +cam_pose, -target_pose, +target_pose.
std::span<const std::string_view> preset_names();

// Applies the named ablation to `base`. Throws ConfigError listing the known
// presets for an unknown name.
SceneDistribution ablation_preset(std::string_view name, const SceneDistribution& base);
inline SceneDistribution ablation_preset(std::string_view name) {
  return ablation_preset(name, SceneDistribution::defaults());
}

}  // namespace pat::attack
