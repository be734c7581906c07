#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pat/config.hpp"
#include "pat/render/image.hpp"
#include "pat/tracker/network.hpp"

namespace pat::cli {

struct CommonOptions {
  std::optional<std::uint64_t> seed;
  std::string config_path;
  std::string out_dir;
  std::vector<std::string> overrides;  // key=value
};

// One command invocation: merged config, output directory and the manifest
// written at the end.
class RunContext {
 public:
  RunContext(std::string command, const CommonOptions& options);

  const std::string& command() const { return command_; }
  const Config& config() const { return config_; }
  std::uint64_t seed() const { return seed_; }
  const std::filesystem::path& out_dir() const { return out_dir_; }
  std::filesystem::path out(const std::string& name) const { return out_dir_ / name; }

  // Relative input paths resolve against the config file's directory.
  std::filesystem::path resolve(const std::string& path) const;
  const std::filesystem::path& base_dir() const { return base_dir_; }

  void artifact(const std::string& name, const std::filesystem::path& path);
  void result(const std::string& name, const std::string& value);
  void write_manifest() const;

  // input.weights, required.
  tracker::TrackerWeights load_weights() const;
  // A PNG path or "pattern:<name>" (random, gray, white, checker,
  // smooth_noise, stripes, inert), drawn at `resolution` from `seed`.
  render::Texture load_texture(const std::string& key, int resolution, std::uint64_t seed) const;

 private:
  std::string command_;
  Config config_;
  std::uint64_t seed_ = 0;
  std::filesystem::path out_dir_;
  std::filesystem::path base_dir_;
  std::vector<std::pair<std::string, std::string>> artifacts_;
  std::vector<std::pair<std::string, std::string>> results_;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace pat::cli
