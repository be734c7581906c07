#include "pat/config.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "pat/error.hpp"

namespace pat {

namespace {

constexpr std::string_view kDefaultText = R"(# Scene distribution
camera.init_x.min = -1.5
camera.init_x.max = 1.5
camera.init_y.min = -11.0
camera.init_y.max = -6.0
camera.init_z.min = 0.6
camera.init_z.max = 1.8
camera.init_roll.min = 0.0
camera.init_roll.max = 0.0
camera.init_pitch.min = -5.0
camera.init_pitch.max = 5.0
camera.init_yaw.min = -15.0
camera.init_yaw.max = 15.0
camera.delta_x.min = -0.1
camera.delta_x.max = 0.1
camera.delta_y.min = -0.5
camera.delta_y.max = 0.5
camera.delta_z.min = -0.1
camera.delta_z.max = 0.1
camera.delta_roll.min = 0.0
camera.delta_roll.max = 0.0
camera.delta_pitch.min = -3.0
camera.delta_pitch.max = 3.0
camera.delta_yaw.min = -3.0
camera.delta_yaw.max = 3.0
camera.fov = 60.0
camera.frame_width = 64
camera.frame_height = 64
target.init_x.min = -1.4
target.init_x.max = 1.4
target.init_y.min = -5.0
target.init_y.max = -0.7
target.init_z.min = 0.0
target.init_z.max = 0.0
target.init_roll.min = 0.0
target.init_roll.max = 0.0
target.init_pitch.min = 0.0
target.init_pitch.max = 0.0
target.init_yaw.min = 0.0
target.init_yaw.max = 180.0
target.delta_x.min = -0.1
target.delta_x.max = 0.1
target.delta_y.min = -0.1
target.delta_y.max = 0.1
target.delta_z.min = 0.0
target.delta_z.max = 0.0
target.delta_roll.min = 0.0
target.delta_roll.max = 0.0
target.delta_pitch.min = 0.0
target.delta_pitch.max = 0.0
target.delta_yaw.min = -10.0
target.delta_yaw.max = 10.0
light.hue.min = 0.0
light.hue.max = 360.0
light.saturation.min = 0.0
light.saturation.max = 0.2
light.value.min = 0.1
light.value.max = 0.7
light.ambient_fraction = 0.2
scene.backgrounds = school,forest
scene.targets = green_person,pr2
poster.x = 0.0
poster.y = 0.0
poster.z = 1.0
poster.width_m = 2.6
poster.height_m = 2.0
poster.texture_resolution = 128

# Tracker training
train.capacity = Lg-lite
train.iterations = 5000
train.batch_size = 32
train.learning_rate = 0.001
train.lr_halve_every = 1500
train.crop_resolution = 64
train.flip_augment = true
train.pairs = 8000
train.val_pairs = 500
train.val_seed = 7919

# Attack
attack.iterations = 1000
attack.batch_size = 20
attack.alpha_schedule = 500:0.75,inf:0.25
attack.texture_resolution = 128
attack.init = random
attack.init_image =
attack.snapshot_every = 100
attack.eval_every = 0
attack.eval_pairs = 5
attack.capacity = Lg-lite
loss.weights = nt:1
loss.w_ps = 0.0
loss.source =

# Evaluation
eval.pairs = 20
eval.frames = 30
eval.camera_jitter = 0.2
eval.seed = 2024

# Servo simulation
servo.lateral.kp = 1.5
servo.lateral.ki = 0.3
servo.lateral.kd = 0.0
servo.forward.kp = 4.0
servo.forward.ki = 0.5
servo.forward.kd = 0.0
servo.vertical.kp = 1.0
servo.vertical.ki = 0.1
servo.vertical.kd = 0.0
servo.integral_limit = 1.0
servo.steps = 100
servo.dt = 0.1
servo.target_vx = 0.25
servo.camera_x = 0.0
servo.camera_y = -8.5
servo.camera_z = 1.2
servo.target_x = -1.2
servo.target_y = -2.7
servo.target_yaw = 90.0
servo.target = green_person
servo.background = school
servo.light_hue = 0.0
servo.light_saturation = 0.0
servo.light_value = 0.7

# Ablation
ablate.presets = all
ablate.eval_every = 10
ablate.eval_pairs = 5

# Preview
preview.count = 4

# Inputs: PNG/weights paths, or pattern:<name> for procedural textures
input.weights =
input.texture =
input.source =

# Run
run.seed = 1
)";

constexpr std::array<std::string_view, 4> kTrainRequired{"train.capacity", "train.iterations", "train.batch_size",
                                                         "train.learning_rate"};
constexpr std::array<std::string_view, 4> kAttackRequired{"attack.iterations", "attack.batch_size",
                                                          "attack.alpha_schedule", "loss.weights"};
constexpr std::array<std::string_view, 2> kEvalRequired{"eval.pairs", "eval.frames"};
constexpr std::array<std::string_view, 3> kAblateRequired{"attack.iterations", "attack.batch_size", "loss.weights"};
constexpr std::array<std::string_view, 2> kServoRequired{"servo.steps", "servo.dt"};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

attack::Range range_of(const Config& c, const std::string& key) {
  return {c.get_double(key + ".min"), c.get_double(key + ".max")};
}

attack::PoseRanges pose_ranges(const Config& c, const std::string& group, const std::string& stem) {
  auto r = [&](const char* axis) { return range_of(c, fmt::format("{}.{}_{}", group, stem, axis)); };
  return {r("x"), r("y"), r("z"), r("roll"), r("pitch"), r("yaw")};
}

}  // namespace

Config Config::parse(std::string_view text, std::string_view origin) {
  Config c;
  c.origin_ = std::string(origin);
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  std::map<std::string, std::string, std::less<>> raw;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    const std::string body = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(fmt::format("{}:{}: expected key = value, got '{}'", origin, lineno, body));
    }
    std::string key = trim(body.substr(0, eq));
    if (key.empty()) throw ConfigError(fmt::format("{}:{}: empty key", origin, lineno));
    if (raw.contains(key)) throw ConfigError(fmt::format("{}:{}: duplicate key '{}'", origin, lineno, key));
    raw.emplace(std::move(key), trim(body.substr(eq + 1)));
  }
  const bool manifest = raw.contains("manifest.version");
  for (auto& [k, v] : raw) {
    if (!manifest) {
      c.entries_.emplace(k, v);
    } else if (k.starts_with("config.")) {
      c.entries_.emplace(k.substr(7), v);
    }
  }
  return c;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("{}: cannot open config file", path.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

bool Config::has(std::string_view key) const { return entries_.find(key) != entries_.end(); }

const std::string& Config::get(std::string_view key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) throw ConfigError(fmt::format("{}: missing key '{}'", origin_, key));
  return it->second;
}

double Config::get_double(std::string_view key) const {
  const std::string& v = get(key);
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) {
    throw ConfigError(fmt::format("{}: key '{}' expects a number, got '{}'", origin_, key, v));
  }
  return out;
}

int Config::get_int(std::string_view key) const {
  const std::string& v = get(key);
  int out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) {
    throw ConfigError(fmt::format("{}: key '{}' expects an integer, got '{}'", origin_, key, v));
  }
  return out;
}

std::uint64_t Config::get_u64(std::string_view key) const {
  const std::string& v = get(key);
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) {
    throw ConfigError(fmt::format("{}: key '{}' expects an unsigned integer, got '{}'", origin_, key, v));
  }
  return out;
}

bool Config::get_bool(std::string_view key) const {
  const std::string& v = get(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(fmt::format("{}: key '{}' expects true/false, got '{}'", origin_, key, v));
}

std::vector<std::string> Config::get_list(std::string_view key) const {
  std::vector<std::string> out;
  std::istringstream in(get(key));
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void Config::set(std::string key, std::string value) { entries_[std::move(key)] = std::move(value); }

void Config::merge(const Config& other) {
  for (const auto& [k, v] : other.entries_) entries_[k] = v;
}

std::string Config::dump(std::string_view prefix) const {
  std::string out;
  for (const auto& [k, v] : entries_) out += fmt::format("{}{}={}\n", prefix, k, v);
  return out;
}

void Config::require(std::span<const std::string_view> keys) const {
  std::vector<std::string_view> missing;
  for (std::string_view k : keys) {
    if (!has(k)) missing.push_back(k);
  }
  if (!missing.empty()) {
    throw ConfigError(fmt::format("{}: missing required keys: {}", origin_, fmt::join(missing, ", ")));
  }
}

void Config::reject_unknown() const {
  std::vector<std::string_view> unknown;
  for (const auto& [k, v] : entries_) {
    if (!default_config().has(k)) unknown.push_back(k);
  }
  if (!unknown.empty()) throw ConfigError(fmt::format("{}: unknown keys: {}", origin_, fmt::join(unknown, ", ")));
}

const Config& default_config() {
  static const Config c = Config::parse(kDefaultText, "<defaults>");
  return c;
}

std::span<const std::string_view> required_keys(std::string_view command) {
  if (command == "train") return kTrainRequired;
  if (command == "attack") return kAttackRequired;
  if (command == "eval") return kEvalRequired;
  if (command == "ablate") return kAblateRequired;
  if (command == "servo") return kServoRequired;
  return {};
}

attack::SceneDistribution scene_distribution_from(const Config& c) {
  attack::SceneDistribution d;
  d.camera_init = pose_ranges(c, "camera", "init");
  d.camera_delta = pose_ranges(c, "camera", "delta");
  d.target_init = pose_ranges(c, "target", "init");
  d.target_delta = pose_ranges(c, "target", "delta");
  d.hue = range_of(c, "light.hue");
  d.saturation = range_of(c, "light.saturation");
  d.value = range_of(c, "light.value");
  d.ambient_fraction = c.get_double("light.ambient_fraction");
  d.backgrounds.clear();
  for (const auto& s : c.get_list("scene.backgrounds")) d.backgrounds.push_back(render::parse_background(s));
  d.targets.clear();
  for (const auto& s : c.get_list("scene.targets")) d.targets.push_back(render::parse_identity(s));
  d.poster.pose = {c.get_double("poster.x"), c.get_double("poster.y"), c.get_double("poster.z"), 0.0, 0.0, 0.0};
  d.poster.width_m = c.get_double("poster.width_m");
  d.poster.height_m = c.get_double("poster.height_m");
  d.poster.texture_resolution = c.get_int("poster.texture_resolution");
  d.horizontal_fov = c.get_double("camera.fov");
  d.frame_width = c.get_int("camera.frame_width");
  d.frame_height = c.get_int("camera.frame_height");
  d.validate();
  return d;
}

tracker::TrainConfig train_config_from(const Config& c) {
  tracker::TrainConfig t;
  t.capacity = tracker::parse_capacity(c.get("train.capacity"));
  t.iterations = c.get_int("train.iterations");
  t.batch_size = c.get_int("train.batch_size");
  t.learning_rate = c.get_double("train.learning_rate");
  t.lr_halve_every = c.get_int("train.lr_halve_every");
  t.crop_resolution = c.get_int("train.crop_resolution");
  t.flip_augment = c.get_bool("train.flip_augment");
  t.seed = c.get_u64("run.seed");
  t.validate();
  return t;
}

attack::AlphaSchedule parse_alpha_schedule(std::string_view text) {
  attack::AlphaSchedule out;
  std::istringstream in{std::string(text)};
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    const auto colon = item.find(':');
    if (colon == std::string::npos) {
      throw ConfigError(fmt::format("alpha schedule entry '{}' must be until_iteration:alpha", item));
    }
    const Config tmp = Config::parse(fmt::format("u={}\na={}", item.substr(0, colon), item.substr(colon + 1)),
                                     "attack.alpha_schedule");
    attack::AlphaStep step;
    step.until_iteration = tmp.get("u") == "inf" ? std::numeric_limits<int>::max() : tmp.get_int("u");
    step.alpha = tmp.get_double("a");
    out.push_back(step);
  }
  if (out.empty()) throw ConfigError("attack.alpha_schedule is empty");
  return out;
}

std::string format_alpha_schedule(const attack::AlphaSchedule& schedule) {
  std::vector<std::string> parts;
  for (const auto& s : schedule) {
    parts.push_back(s.until_iteration == std::numeric_limits<int>::max() ? fmt::format("inf:{}", s.alpha)
                                                                         : fmt::format("{}:{}", s.until_iteration, s.alpha));
  }
  return fmt::format("{}", fmt::join(parts, ","));
}

attack::AttackConfig attack_config_from(const Config& c, const std::filesystem::path& base_dir) {
  auto resolve = [&](const std::string& p) {
    const std::filesystem::path path(p);
    return path.is_absolute() || base_dir.empty() ? path : base_dir / path;
  };
  attack::AttackConfig a;
  a.iterations = c.get_int("attack.iterations");
  a.batch_size = c.get_int("attack.batch_size");
  a.alpha = parse_alpha_schedule(c.get("attack.alpha_schedule"));
  a.texture_resolution = c.get_int("attack.texture_resolution");
  a.init = attack::parse_init_mode(c.get("attack.init"));
  if (!c.get("attack.init_image").empty()) a.init_image = render::load_png(resolve(c.get("attack.init_image")));
  a.snapshot_every = c.get_int("attack.snapshot_every");
  a.seed = c.get_u64("run.seed");
  a.dist = scene_distribution_from(c);

  a.loss = attack::LossSpec{};
  for (const auto& item : c.get_list("loss.weights")) {
    const auto colon = item.rfind(':');
    if (colon == std::string::npos) throw ConfigError(fmt::format("loss.weights entry '{}' must be term:weight", item));
    const Config tmp = Config::parse(fmt::format("w={}", item.substr(colon + 1)), "loss.weights");
    a.loss.weight(attack::parse_loss_term(item.substr(0, colon))) = tmp.get_double("w");
  }
  a.loss.w_ps = c.get_double("loss.w_ps");
  if (!c.get("loss.source").empty()) a.loss.source_texture = render::load_png(resolve(c.get("loss.source")));
  a.validate();
  return a;
}

eval::TraversalOptions traversal_options_from(const Config& c) {
  eval::TraversalOptions o;
  o.n_frames = c.get_int("eval.frames");
  o.camera_jitter = c.get_double("eval.camera_jitter");
  if (o.n_frames < 2) throw ConfigError("eval.frames must be >= 2");
  return o;
}

eval::ServoConfig servo_config_from(const Config& c) {
  eval::ServoConfig s;
  auto gains = [&](const char* ch) {
    return eval::PidGains{c.get_double(fmt::format("servo.{}.kp", ch)), c.get_double(fmt::format("servo.{}.ki", ch)),
                          c.get_double(fmt::format("servo.{}.kd", ch))};
  };
  s.lateral = gains("lateral");
  s.forward = gains("forward");
  s.vertical = gains("vertical");
  s.integral_limit = c.get_double("servo.integral_limit");
  s.n_steps = c.get_int("servo.steps");
  s.dt = c.get_double("servo.dt");
  s.target_velocity = {c.get_double("servo.target_vx"), 0.0, 0.0, 0.0, 0.0, 0.0};
  return s;
}

render::SceneSpec servo_scene_from(const Config& c) {
  const attack::SceneDistribution d = scene_distribution_from(c);
  render::SceneSpec s;
  s.camera.pose = {c.get_double("servo.camera_x"), c.get_double("servo.camera_y"), c.get_double("servo.camera_z"),
                   0.0, 0.0, 0.0};
  s.camera.horizontal_fov = d.horizontal_fov;
  s.camera.frame_width = d.frame_width;
  s.camera.frame_height = d.frame_height;
  s.poster = d.poster;
  s.sprite.identity = render::parse_identity(c.get("servo.target"));
  s.sprite.pose = {c.get_double("servo.target_x"), c.get_double("servo.target_y"), 0.0, 0.0, 0.0,
                   c.get_double("servo.target_yaw")};
  s.sprite.height_m = render::default_height_m(s.sprite.identity);
  s.background = render::parse_background(c.get("servo.background"));
  s.light = {c.get_double("servo.light_hue"), c.get_double("servo.light_saturation"),
             c.get_double("servo.light_value")};
  s.ambient_fraction = d.ambient_fraction;
  return s;
}

}  // namespace pat
