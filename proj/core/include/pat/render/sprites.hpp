#pragma once

#include <optional>
#include <span>
#include <string_view>

#include "pat/render/geometry.hpp"
#include "pat/render/image.hpp"

namespace pat::render {

// Procedural billboard targets: three people and two humanoid robots.
enum class TargetIdentity { green_person, white_person, tshirt_person, pr2, robonaut };

std::span<const TargetIdentity> all_identities();
std::string_view identity_name(TargetIdentity id);
TargetIdentity parse_identity(std::string_view name);
double default_height_m(TargetIdentity id);

// Horizontal squash of the silhouette for a body yaw. 90 deg faces the
// camera (factor 1), 0 / 180 deg is a profile.
double facing_factor(double yaw_deg);

// Colour of the silhouette at (u, v): u is the lateral offset from the
// centre line and v the height above the feet, both in units of the target
// height. Empty outside the alpha mask.
std::optional<Rgb> sprite_texel(TargetIdentity id, double u, double v, double yaw_deg);

// Widest lateral extent of the mask (units of height) at facing factor 1.
double sprite_half_width(TargetIdentity id);

// Procedural surroundings keyed by id: school is a gradient, forest tiled
// noise, playground stripes and cafe a flat wall.
enum class Background { school, forest, playground, cafe };

std::span<const Background> all_backgrounds();
std::string_view background_name(Background bg);
Background parse_background(std::string_view name);

// Unshaded colour seen along the world-space viewing direction `dir`.
Rgb background_color(Background bg, Vec3 dir);

}  // namespace pat::render
