#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pat/attack/scene_distribution.hpp"
#include "pat/diff/gradcheck.hpp"

namespace pat::checks {

inline constexpr double kGradTolerance = 1e-3;
inline constexpr double kFiniteDifferenceStep = 1e-4;

struct CompositeCheck {
  std::string name;
  diff::GradCheckResult result;
  std::size_t coordinates = 0;
  double seconds = 0.0;

  bool passed() const { return result.max_rel_error < kGradTolerance; }
};

// A 32x32 frame pair looking at the poster with the target standing in front
// of it, so the search area overlaps both sprite and poster.
attack::ScenePair tiny_scene_pair();

// Training loss w.r.t. an 8x8 search crop of a Lg-lite network.
CompositeCheck tracker_composite(std::uint64_t seed);
// Weighted sum of a rendered 32x32 frame w.r.t. a 16x16 texture.
CompositeCheck render_composite(std::uint64_t seed);
// render -> crop -> predict -> L_nt w.r.t. a 16x16 texture.
CompositeCheck pipeline_composite(std::uint64_t seed);

std::vector<CompositeCheck> gradcheck_suite(std::uint64_t seed);

}  // namespace pat::checks
