#include "pat/render/sprites.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>

#include <fmt/format.h>

#include "pat/error.hpp"

namespace pat::render {

namespace {

constexpr std::array<TargetIdentity, 5> kIdentities{TargetIdentity::green_person, TargetIdentity::white_person,
                                                    TargetIdentity::tshirt_person, TargetIdentity::pr2,
                                                    TargetIdentity::robonaut};
constexpr std::array<Background, 4> kBackgrounds{Background::school, Background::forest, Background::playground,
                                                 Background::cafe};

bool in_ellipse(double u, double v, double cu, double cv, double ru, double rv) {
  const double a = (u - cu) / ru, b = (v - cv) / rv;
  return a * a + b * b <= 1.0;
}

bool in_rect(double u, double v, double u0, double u1, double v0, double v1) {
  return u >= u0 && u <= u1 && v >= v0 && v <= v1;
}

struct PersonColors {
  Rgb skin, hair, shirt, sleeve, pants, shoes;
  double sleeve_end;  // arm height below which the arm shows skin
};

std::optional<Rgb> person(const PersonColors& pc, double u, double v, bool front) {
  const double au = std::fabs(u);
  if (in_ellipse(u, v, 0.0, 0.925, 0.055, 0.068)) {
    if (!front) return pc.hair;
    if (v > 0.955) return pc.hair;
    return pc.skin;
  }
  if (au <= 0.025 && v >= 0.84 && v <= 0.87) return pc.skin;
  // Torso narrows slightly towards the hips; shoulders are rounded.
  const double torso_half = 0.10 + 0.02 * std::clamp((v - 0.5) / 0.3, 0.0, 1.0);
  if (v >= 0.5 && v <= 0.85 && au <= torso_half && !(v > 0.82 && au > 0.09)) {
    if (v < 0.53) return pc.pants;  // belt line
    return pc.shirt;
  }
  if (au >= 0.125 && au <= 0.17 && v >= 0.47 && v <= 0.82) {
    if (v < 0.5) return pc.skin;
    return v < pc.sleeve_end ? pc.skin : pc.sleeve;
  }
  if (std::fabs(au - 0.055) <= 0.045 && v >= 0.0 && v < 0.5) {
    if (v < 0.04) return pc.shoes;
    return pc.pants;
  }
  return std::nullopt;
}

std::optional<Rgb> pr2(double u, double v, bool front) {
  const double au = std::fabs(u);
  const Rgb dark{0.18, 0.18, 0.2}, grey{0.55, 0.56, 0.58}, white{0.88, 0.88, 0.9}, red{0.7, 0.18, 0.16};
  if (in_rect(u, v, -0.2, 0.2, 0.0, 0.26)) return (v < 0.05) ? dark : Rgb{0.3, 0.3, 0.32};
  if (au <= 0.07 && v > 0.26 && v <= 0.6) return grey;
  if (au <= 0.17 && v > 0.6 && v <= 0.8) return white;
  if (au > 0.17 && au <= 0.23 && v >= 0.42 && v <= 0.78) return (v < 0.5) ? dark : red;
  if (au <= 0.035 && v > 0.8 && v <= 0.84) return grey;
  if (au <= 0.09 && v > 0.84 && v <= 1.0) {
    if (front && v > 0.9 && v < 0.94) return Rgb{0.1, 0.35, 0.75};  // sensor head
    return dark;
  }
  return std::nullopt;
}

std::optional<Rgb> robonaut(double u, double v, bool front) {
  const double au = std::fabs(u);
  const Rgb gold{0.85, 0.68, 0.2}, white{0.9, 0.9, 0.88}, joint{0.25, 0.25, 0.28};
  if (in_ellipse(u, v, 0.0, 0.92, 0.06, 0.075)) return (front && v < 0.95 && au < 0.04) ? Rgb{0.1, 0.1, 0.12} : gold;
  if (au <= 0.15 && v >= 0.52 && v <= 0.85) return (v > 0.7 && au < 0.05) ? gold : white;
  if (au > 0.15 && au <= 0.2 && v >= 0.45 && v <= 0.83) return (std::fabs(v - 0.64) < 0.02) ? joint : white;
  if (au <= 0.12 && v >= 0.47 && v < 0.52) return joint;
  if (std::fabs(au - 0.065) <= 0.05 && v >= 0.0 && v < 0.47) {
    return (std::fabs(v - 0.25) < 0.02 || v < 0.03) ? joint : white;
  }
  return std::nullopt;
}

std::uint32_t hash2(std::int32_t x, std::int32_t y, std::uint32_t salt) {
  std::uint32_t h = static_cast<std::uint32_t>(x) * 0x8da6b343u ^ static_cast<std::uint32_t>(y) * 0xd8163841u ^
                    salt * 0xcb1ab31fu;
  h ^= h >> 13;
  h *= 0x5bd1e995u;
  h ^= h >> 15;
  return h;
}

double value_noise(double x, double y, std::uint32_t salt) {
  const double fx = std::floor(x), fy = std::floor(y);
  const auto ix = static_cast<std::int32_t>(fx), iy = static_cast<std::int32_t>(fy);
  const double tx = x - fx, ty = y - fy;
  auto r = [&](std::int32_t a, std::int32_t b) { return (hash2(a, b, salt) & 0xffffu) / 65535.0; };
  const double top = r(ix, iy) * (1 - tx) + r(ix + 1, iy) * tx;
  const double bot = r(ix, iy + 1) * (1 - tx) + r(ix + 1, iy + 1) * tx;
  return top * (1 - ty) + bot * ty;
}

Rgb lerp(const Rgb& a, const Rgb& b, double t) {
  return {a[0] + (b[0] - a[0]) * t, a[1] + (b[1] - a[1]) * t, a[2] + (b[2] - a[2]) * t};
}

}  // namespace

std::span<const TargetIdentity> all_identities() { return kIdentities; }

std::string_view identity_name(TargetIdentity id) {
  switch (id) {
    case TargetIdentity::green_person: return "green_person";
    case TargetIdentity::white_person: return "white_person";
    case TargetIdentity::tshirt_person: return "tshirt_person";
    case TargetIdentity::pr2: return "pr2";
    case TargetIdentity::robonaut: return "robonaut";
  }
  return "unknown";
}

TargetIdentity parse_identity(std::string_view name) {
  for (TargetIdentity id : kIdentities) {
    if (identity_name(id) == name) return id;
  }
  throw ConfigError(fmt::format("unknown target identity '{}' (expected green_person, white_person, "
                                "tshirt_person, pr2, robonaut)",
                                name));
}

double default_height_m(TargetIdentity id) {
  switch (id) {
    case TargetIdentity::green_person: return 1.75;
    case TargetIdentity::white_person: return 1.8;
    case TargetIdentity::tshirt_person: return 1.7;
    case TargetIdentity::pr2: return 1.4;
    case TargetIdentity::robonaut: return 1.6;
  }
  return 1.75;
}

double facing_factor(double yaw_deg) { return 0.55 + 0.45 * std::fabs(std::sin(yaw_deg * kDegToRad)); }

double sprite_half_width(TargetIdentity id) {
  switch (id) {
    case TargetIdentity::pr2: return 0.23;
    case TargetIdentity::robonaut: return 0.2;
    default: return 0.17;
  }
}

std::optional<Rgb> sprite_texel(TargetIdentity id, double u, double v, double yaw_deg) {
  if (v < 0.0 || v > 1.0) return std::nullopt;
  const double us = u / facing_factor(yaw_deg);
  const bool front = std::sin(yaw_deg * kDegToRad) >= 0.0;
  switch (id) {
    case TargetIdentity::green_person:
      return person({{0.82, 0.62, 0.48}, {0.22, 0.13, 0.06}, {0.16, 0.62, 0.22}, {0.16, 0.62, 0.22},
                     {0.2, 0.2, 0.26}, {0.08, 0.08, 0.08}, 0.5},
                    us, v, front);
    case TargetIdentity::white_person:
      return person({{0.9, 0.74, 0.62}, {0.75, 0.6, 0.3}, {0.93, 0.93, 0.9}, {0.93, 0.93, 0.9},
                     {0.82, 0.82, 0.78}, {0.5, 0.35, 0.2}, 0.5},
                    us, v, front);
    case TargetIdentity::tshirt_person: {
      if (front && std::fabs(us) < 0.04 && v > 0.68 && v < 0.76) return Rgb{0.95, 0.95, 0.95};  // logo
      return person({{0.6, 0.42, 0.3}, {0.05, 0.05, 0.05}, {0.82, 0.14, 0.14}, {0.82, 0.14, 0.14},
                     {0.15, 0.25, 0.55}, {0.9, 0.9, 0.9}, 0.7},
                    us, v, front);
    }
    case TargetIdentity::pr2: return pr2(us, v, front);
    case TargetIdentity::robonaut: return robonaut(us, v, front);
  }
  return std::nullopt;
}

std::span<const Background> all_backgrounds() { return kBackgrounds; }

std::string_view background_name(Background bg) {
  switch (bg) {
    case Background::school: return "school";
    case Background::forest: return "forest";
    case Background::playground: return "playground";
    case Background::cafe: return "cafe";
  }
  return "unknown";
}

Background parse_background(std::string_view name) {
  for (Background bg : kBackgrounds) {
    if (background_name(bg) == name) return bg;
  }
  throw ConfigError(fmt::format("unknown background '{}' (expected school, forest, playground, cafe)", name));
}

Rgb background_color(Background bg, Vec3 dir) {
  const double horiz = std::sqrt(dir.x * dir.x + dir.y * dir.y);
  const double el = std::atan2(dir.z, horiz) / kDegToRad;
  const double az = std::atan2(dir.x, dir.y) / kDegToRad;

  if (el < 0.0) {
    switch (bg) {
      case Background::school: return lerp({0.42, 0.42, 0.44}, {0.3, 0.3, 0.32}, std::min(-el / 30.0, 1.0));
      case Background::forest: {
        const double n = value_noise(az / 3.0, el / 2.0, 7u);
        return {0.22 + 0.12 * n, 0.32 + 0.15 * n, 0.14 + 0.05 * n};
      }
      case Background::playground: {
        const double n = value_noise(az / 1.5, el / 1.5, 11u);
        return {0.72 + 0.1 * n, 0.6 + 0.1 * n, 0.4 + 0.08 * n};
      }
      case Background::cafe: {
        const bool tile = (static_cast<int>(std::floor(az / 4.0)) + static_cast<int>(std::floor(el / 2.0))) % 2 == 0;
        return tile ? Rgb{0.58, 0.48, 0.38} : Rgb{0.46, 0.36, 0.28};
      }
    }
  }
  switch (bg) {
    case Background::school:
      // Brick facade fading into sky.
      return lerp({0.62, 0.32, 0.26}, {0.72, 0.82, 0.94}, std::clamp((el - 4.0) / 18.0, 0.0, 1.0));
    case Background::forest: {
      const double n = value_noise(az / 4.0, el / 4.0, 3u);
      const double m = value_noise(az / 1.2, el / 1.2, 5u);
      const double t = 0.6 * n + 0.4 * m;
      return {0.08 + 0.18 * t, 0.22 + 0.35 * t, 0.06 + 0.12 * t};
    }
    case Background::playground: {
      if (el > 14.0) return {0.62, 0.78, 0.95};
      const bool stripe = static_cast<int>(std::floor(az / 5.0)) % 2 == 0;
      return stripe ? Rgb{0.92, 0.78, 0.18} : Rgb{0.2, 0.45, 0.8};
    }
    case Background::cafe: return {0.8, 0.74, 0.64};
  }
  return {0.5, 0.5, 0.5};
}

}  // namespace pat::render
