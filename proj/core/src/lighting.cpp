#include "pat/render/lighting.hpp"

#include <cmath>

#include <fmt/format.h>

#include "pat/error.hpp"

namespace pat::render {

Rgb hsv_to_rgb(double hue_deg, double saturation, double value) {
  double h = std::fmod(hue_deg, 360.0);
  if (h < 0.0) h += 360.0;
  const double c = value * saturation;
  const double hp = h / 60.0;
  const double x = c * (1.0 - std::fabs(std::fmod(hp, 2.0) - 1.0));
  double r = 0, g = 0, b = 0;
  if (hp < 1.0) {
    r = c, g = x;
  } else if (hp < 2.0) {
    r = x, g = c;
  } else if (hp < 3.0) {
    g = c, b = x;
  } else if (hp < 4.0) {
    g = x, b = c;
  } else if (hp < 5.0) {
    r = x, b = c;
  } else {
    r = c, b = x;
  }
  const double m = value - c;
  return {r + m, g + m, b + m};
}

LightingParams light_params_from_spec(const LightSpec& light, double ambient_fraction) {
  if (!(light.hue >= 0.0 && light.hue <= 360.0) || !(light.saturation >= 0.0 && light.saturation <= 1.0) ||
      !(light.value >= 0.0 && light.value <= 1.0)) {
    throw ConfigError(fmt::format("light out of range: hue {} saturation {} value {}", light.hue,
                                  light.saturation, light.value));
  }
  if (!(ambient_fraction >= 0.0 && ambient_fraction <= 1.0)) {
    throw ConfigError(fmt::format("ambient fraction {} outside [0,1]", ambient_fraction));
  }
  LightingParams p;
  p.gain = hsv_to_rgb(light.hue, light.saturation, light.value);
  for (std::size_t c = 0; c < 3; ++c) p.bias[c] = ambient_fraction * p.gain[c];
  return p;
}

}  // namespace pat::render
