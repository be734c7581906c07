#include "pat/tracker/weights_io.hpp"

#include <array>
#include <cstring>
#include <fstream>

#include <fmt/format.h>

#include "pat/error.hpp"

namespace pat::tracker {

namespace {

constexpr std::array<char, 4> kMagic{'P', 'A', 'T', 'W'};

template <typename T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is, const std::filesystem::path& path) {
  T v{};
  if (!is.read(reinterpret_cast<char*>(&v), sizeof(T))) {
    throw Error(fmt::format("{}: truncated weights file", path.string()));
  }
  return v;
}

}  // namespace

void save_weights(const TrackerWeights& weights, const std::filesystem::path& path) {
  weights.validate();
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(fmt::format("{}: cannot open for writing", path.string()));
  os.write(kMagic.data(), kMagic.size());
  put<std::uint32_t>(os, kWeightsVersion);
  put<std::uint8_t>(os, static_cast<std::uint8_t>(weights.capacity));
  put<std::int32_t>(os, weights.crop_resolution);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(weights.params.size()));
  for (const diff::Tensor& t : weights.params) {
    put<std::uint32_t>(os, static_cast<std::uint32_t>(t.rank()));
    for (int d : t.shape()) put<std::int32_t>(os, d);
    os.write(reinterpret_cast<const char*>(t.ptr()), static_cast<std::streamsize>(t.size() * sizeof(double)));
  }
  if (!os) throw Error(fmt::format("{}: write failed", path.string()));
}

TrackerWeights load_weights(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(fmt::format("{}: cannot open weights file", path.string()));
  std::array<char, 4> magic{};
  if (!is.read(magic.data(), magic.size()) || magic != kMagic) {
    throw Error(fmt::format("{}: not a tracker weights file (bad magic)", path.string()));
  }
  const auto version = get<std::uint32_t>(is, path);
  if (version != kWeightsVersion) {
    throw Error(fmt::format("{}: unsupported weights version {} (expected {})", path.string(), version, kWeightsVersion));
  }
  const auto cap = get<std::uint8_t>(is, path);
  if (cap > 1) throw Error(fmt::format("{}: unknown capacity tag {}", path.string(), cap));
  TrackerWeights w;
  w.capacity = static_cast<Capacity>(cap);
  w.crop_resolution = get<std::int32_t>(is, path);
  const auto count = get<std::uint32_t>(is, path);
  if (count != kNumParams) throw Error(fmt::format("{}: expected {} tensors, found {}", path.string(), kNumParams, count));
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto rank = get<std::uint32_t>(is, path);
    if (rank > 4) throw Error(fmt::format("{}: tensor {} has rank {}", path.string(), i, rank));
    diff::Shape shape;
    for (std::uint32_t r = 0; r < rank; ++r) {
      const auto d = get<std::int32_t>(is, path);
      if (d <= 0) throw Error(fmt::format("{}: tensor {} has dimension {}", path.string(), i, d));
      shape.push_back(d);
    }
    diff::Tensor t(shape);
    if (!is.read(reinterpret_cast<char*>(t.ptr()), static_cast<std::streamsize>(t.size() * sizeof(double)))) {
      throw Error(fmt::format("{}: truncated weights file", path.string()));
    }
    w.params.push_back(std::move(t));
  }
  w.validate();
  return w;
}

}  // namespace pat::tracker
