#include "pat/attack/presets.hpp"

#include <array>
#include <span>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "pat/error.hpp"

namespace pat::attack {

namespace {

constexpr std::array<std::string_view, 11> kPresets{"-bg",        "+bg",       "-target",      "+target",
                                                    "-light",     "+light",    "small_poster", "-cam_pose",
                                                    "+cam_pose", "-target_pose", "+target_pose"};

}  // namespace

std::span<const std::string_view> preset_names() { return kPresets; }

SceneDistribution ablation_preset(std::string_view name, const SceneDistribution& base) {
  SceneDistribution d = base;
  const auto bgs = render::all_backgrounds();
  const auto ids = render::all_identities();
  if (name == "-bg") {
    d.backgrounds = {render::Background::playground};
  } else if (name == "+bg") {
    d.backgrounds.assign(bgs.begin(), bgs.end());
  } else if (name == "-target") {
    d.targets = {render::TargetIdentity::green_person};
  } else if (name == "+target") {
    d.targets.assign(ids.begin(), ids.end());
  } else if (name == "-light") {
    d.hue = {0.0, 360.0};
    d.saturation = Range::point(0.0);
    d.value = Range::point(0.7);
  } else if (name == "+light") {
    d.hue = {0.0, 360.0};
    d.saturation = {0.0, 0.7};
    d.value = {0.0, 0.7};
  } else if (name == "small_poster") {
    d.poster.width_m *= 0.5;
    d.poster.height_m *= 0.5;
  } else if (name == "-cam_pose") {
    d.camera_init = {Range::point(0.0),  Range::point(-8.5), Range::point(1.2),
                     Range::point(0.0), Range::point(0.0),  Range::point(0.0)};
    d.camera_delta = {};
  } else if (name == "+cam_pose") {
    d.camera_init = {{-2.0, 2.0}, {-16.5, -5.5}, {0.4, 2.2}, {-1.5, 1.5}, {-10.0, 10.0}, {-20.0, 20.0}};
    d.camera_delta = {{-0.15, 0.15}, {-0.8, 0.8}, {-0.15, 0.15}, {0.0, 0.0}, {-5.0, 5.0}, {-5.0, 5.0}};
  } else if (name == "-target_pose") {
    d.target_init = {Range::point(0.0), Range::point(-2.7), Range::point(0.0),
                     Range::point(0.0), Range::point(0.0),  Range::point(90.0)};
    d.target_delta = {};
  } else if (name == "+target_pose") {
    d.target_init = {{-1.6, 1.6}, {-5.0, -0.7}, {0.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}, {-90.0, 270.0}};
    d.target_delta = {{-0.15, 0.15}, {-0.15, 0.15}, {0.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}, {-20.0, 20.0}};
  } else {
    throw ConfigError(fmt::format("unknown ablation preset '{}' (known: {})", name, fmt::join(kPresets, ", ")));
  }
  return d;
}

}  // namespace pat::attack
