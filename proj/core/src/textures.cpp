#include "pat/render/textures.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "pat/error.hpp"

namespace pat::render {

namespace {

Rgb random_color(Rng& rng) { return {uniform(rng, 0.0, 1.0), uniform(rng, 0.0, 1.0), uniform(rng, 0.0, 1.0)}; }

Texture two_tone(int res, const Rgb& a, const Rgb& b, auto&& mix) {
  Texture t(res, res);
  for (int y = 0; y < res; ++y) {
    for (int x = 0; x < res; ++x) {
      const double m = mix(x, y);
      for (int c = 0; c < 3; ++c) {
        const auto uc = static_cast<std::size_t>(c);
        t.at(x, y, c) = a[uc] + (b[uc] - a[uc]) * m;
      }
    }
  }
  return t;
}

Texture checker(int res, int tiles, const Rgb& a, const Rgb& b) {
  const double cell = static_cast<double>(res) / tiles;
  return two_tone(res, a, b, [cell](int x, int y) {
    return (static_cast<int>(x / cell) + static_cast<int>(y / cell)) % 2 == 0 ? 0.0 : 1.0;
  });
}

Texture smooth_noise(int res, Rng& rng, const Rgb& a, const Rgb& b) {
  const int grid = 2 + static_cast<int>(uniform_index(rng, 6));
  std::vector<double> lattice(static_cast<std::size_t>((grid + 1) * (grid + 1)));
  for (double& v : lattice) v = uniform(rng, 0.0, 1.0);
  return two_tone(res, a, b, [&](int x, int y) {
    const double gx = (x + 0.5) / res * grid, gy = (y + 0.5) / res * grid;
    const int ix = std::min(static_cast<int>(gx), grid - 1), iy = std::min(static_cast<int>(gy), grid - 1);
    const double tx = gx - ix, ty = gy - iy;
    auto l = [&](int i, int j) { return lattice[static_cast<std::size_t>(j * (grid + 1) + i)]; };
    return (l(ix, iy) * (1 - tx) + l(ix + 1, iy) * tx) * (1 - ty) + (l(ix, iy + 1) * (1 - tx) + l(ix + 1, iy + 1) * tx) * ty;
  });
}

Texture stripes(int res, Rng& rng, const Rgb& a, const Rgb& b) {
  const double angle = uniform(rng, 0.0, std::numbers::pi);
  const double period = uniform(rng, 0.08, 0.4) * res;
  const double ca = std::cos(angle), sa = std::sin(angle);
  return two_tone(res, a, b, [=](int x, int y) {
    return 0.5 + 0.5 * std::sin(2.0 * std::numbers::pi * (ca * x + sa * y) / period);
  });
}

}  // namespace

std::string_view pattern_name(TexturePattern p) {
  switch (p) {
    case TexturePattern::random: return "random";
    case TexturePattern::gray: return "gray";
    case TexturePattern::white: return "white";
    case TexturePattern::checker: return "checker";
    case TexturePattern::smooth_noise: return "smooth_noise";
    case TexturePattern::stripes: return "stripes";
  }
  return "unknown";
}

TexturePattern parse_pattern(std::string_view name) {
  for (auto p : {TexturePattern::random, TexturePattern::gray, TexturePattern::white, TexturePattern::checker,
                 TexturePattern::smooth_noise, TexturePattern::stripes}) {
    if (pattern_name(p) == name) return p;
  }
  throw ConfigError(fmt::format("unknown texture pattern '{}' (expected random, gray, white, checker, smooth_noise, stripes)", name));
}

Texture make_texture(TexturePattern pattern, int resolution, Rng& rng) {
  if (resolution <= 0) throw ConfigError(fmt::format("texture resolution {} must be positive", resolution));
  switch (pattern) {
    case TexturePattern::random: {
      Texture t(resolution, resolution);
      for (double& v : t.data()) v = uniform(rng, 0.0, 1.0);
      return t;
    }
    case TexturePattern::gray: return Texture(resolution, resolution, 0.5);
    case TexturePattern::white: return Texture(resolution, resolution, 1.0);
    case TexturePattern::checker: return checker(resolution, 8, {0, 0, 0}, {1, 1, 1});
    case TexturePattern::smooth_noise:
    case TexturePattern::stripes: {
      const Rgb a = random_color(rng);
      const Rgb b = random_color(rng);
      return pattern == TexturePattern::stripes ? stripes(resolution, rng, a, b) : smooth_noise(resolution, rng, a, b);
    }
  }
  throw ConfigError("unknown texture pattern");
}

Texture inert_texture(int resolution, Rng& rng) {
  if (resolution <= 0) throw ConfigError(fmt::format("texture resolution {} must be positive", resolution));
  const Rgb a = random_color(rng), b = random_color(rng);
  switch (uniform_index(rng, 5)) {
    case 0: {
      Texture t(resolution, resolution);
      for (int y = 0; y < resolution; ++y)
        for (int x = 0; x < resolution; ++x)
          for (int c = 0; c < 3; ++c) t.at(x, y, c) = a[static_cast<std::size_t>(c)];
      return t;
    }
    case 1: {
      const double amp = uniform(rng, 0.05, 0.5);
      Texture t(resolution, resolution);
      for (int y = 0; y < resolution; ++y)
        for (int x = 0; x < resolution; ++x)
          for (int c = 0; c < 3; ++c)
            t.at(x, y, c) = std::clamp(a[static_cast<std::size_t>(c)] + amp * uniform(rng, -1.0, 1.0), 0.0, 1.0);
      return t;
    }
    case 2: return smooth_noise(resolution, rng, a, b);
    case 3: return checker(resolution, 2 + static_cast<int>(uniform_index(rng, 14)), a, b);
    default: return stripes(resolution, rng, a, b);
  }
}

}  // namespace pat::render
