#pragma once

#include "pat/render/image.hpp"

namespace pat::render {

// Diffuse light colour in HSV. hue in degrees [0, 360), saturation and value
// in [0, 1].
struct LightSpec {
  double hue = 0.0;
  double saturation = 0.0;
  double value = 1.0;
};

// Per-channel linear shading: out = clamp(gain * c + bias, 0, 1).
struct LightingParams {
  Rgb gain{1.0, 1.0, 1.0};
  Rgb bias{0.0, 0.0, 0.0};

  double shade(double c, int channel) const {
    return gain[static_cast<std::size_t>(channel)] * c + bias[static_cast<std::size_t>(channel)];
  }
};

Rgb hsv_to_rgb(double hue_deg, double saturation, double value);

// gain = value * RGB(hue, saturation); bias = ambient_fraction * gain.
// Throws ConfigError for out-of-range inputs.
LightingParams light_params_from_spec(const LightSpec& light, double ambient_fraction);

}  // namespace pat::render
