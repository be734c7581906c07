#pragma once

#include <string_view>

#include "pat/render/image.hpp"
#include "pat/rng.hpp"

namespace pat::render {

enum class TexturePattern { random, gray, white, checker, smooth_noise, stripes };

std::string_view pattern_name(TexturePattern p);
TexturePattern parse_pattern(std::string_view name);

// random: per-texel uniform [0, 1]; gray: constant 0.5; white: constant 1;
// checker: 8x8 black/white tiles. smooth_noise and stripes draw their colours
// and frequencies from rng.
Texture make_texture(TexturePattern pattern, int resolution, Rng& rng);

// A non-adversarial texture drawn from a mixed pool (flat colour, noise,
// smooth noise, checker, stripes) with random colours.
Texture inert_texture(int resolution, Rng& rng);

}  // namespace pat::render
