#pragma once

#include <filesystem>

#include "pat/tracker/network.hpp"

namespace pat::tracker {

// Binary layout (little-endian): "PATW", u32 version, u8 capacity,
// i32 crop resolution, u32 tensor count, then per tensor u32 rank, i32 dims,
// f64 values.
inline constexpr std::uint32_t kWeightsVersion = 1;

void save_weights(const TrackerWeights& weights, const std::filesystem::path& path);
TrackerWeights load_weights(const std::filesystem::path& path);

}  // namespace pat::tracker
