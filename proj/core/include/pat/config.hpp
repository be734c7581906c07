#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pat/attack/attack.hpp"
#include "pat/eval/sequence.hpp"
#include "pat/eval/servo.hpp"
#include "pat/tracker/trainer.hpp"

namespace pat {

// Flat "key = value" file. '#' starts a comment; blank lines are ignored.
// A run manifest is also accepted: only its "config.*" entries are read,
// with the prefix stripped.
class Config {
 public:
  static Config parse(std::string_view text, std::string_view origin = "<string>");
  static Config load(const std::filesystem::path& path);

  bool has(std::string_view key) const;
  const std::string& get(std::string_view key) const;
  double get_double(std::string_view key) const;
  int get_int(std::string_view key) const;
  std::uint64_t get_u64(std::string_view key) const;
  bool get_bool(std::string_view key) const;
  std::vector<std::string> get_list(std::string_view key) const;  // comma separated

  void set(std::string key, std::string value);
  // Entries of `other` override ours.
  void merge(const Config& other);

  const std::map<std::string, std::string, std::less<>>& entries() const { return entries_; }
  // Sorted "key=value" lines.
  std::string dump(std::string_view prefix = "") const;

  // ConfigError listing every missing key.
  void require(std::span<const std::string_view> keys) const;
  // ConfigError listing every key absent from the schema.
  void reject_unknown() const;

 private:
  std::string origin_ = "<string>";
  std::map<std::string, std::string, std::less<>> entries_;
};

// Every recognised key with its default value.
const Config& default_config();

// Keys a config file must set for each CLI command.
std::span<const std::string_view> required_keys(std::string_view command);

attack::SceneDistribution scene_distribution_from(const Config& c);
tracker::TrainConfig train_config_from(const Config& c);
// Loss source and init images are loaded relative to base_dir.
attack::AttackConfig attack_config_from(const Config& c, const std::filesystem::path& base_dir = {});
attack::AlphaSchedule parse_alpha_schedule(std::string_view text);
std::string format_alpha_schedule(const attack::AlphaSchedule& schedule);
eval::TraversalOptions traversal_options_from(const Config& c);
eval::ServoConfig servo_config_from(const Config& c);
// Initial servo scene; camera model, poster and ambient come from the
// scene distribution keys.
render::SceneSpec servo_scene_from(const Config& c);

}  // namespace pat
