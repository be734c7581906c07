#pragma once

#include <cstdint>
#include <random>

namespace pat {

using Rng = std::mt19937_64;

// splitmix64 finalizer; derives independent stream seeds from (seed, index).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Always consumes exactly one draw so degenerate ranges keep streams aligned.
inline double uniform(Rng& rng, double lo, double hi) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  return lo + (hi - lo) * unit(rng);
}

inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  return pick(rng);
}

}  // namespace pat
