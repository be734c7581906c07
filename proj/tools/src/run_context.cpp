#include "run_context.hpp"

#include <fstream>

#include <fmt/format.h>

#include "pat/error.hpp"
#include "pat/render/textures.hpp"
#include "pat/tracker/weights_io.hpp"

namespace pat::cli {

namespace fs = std::filesystem;

RunContext::RunContext(std::string command, const CommonOptions& options)
    : command_(std::move(command)), config_(default_config()), start_(std::chrono::steady_clock::now()) {
  if (!options.config_path.empty()) {
    const Config file = Config::load(options.config_path);
    file.reject_unknown();
    file.require(required_keys(command_));
    config_.merge(file);
    base_dir_ = fs::path(options.config_path).parent_path();
  }
  for (const std::string& kv : options.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError(fmt::format("--set expects key=value, got '{}'", kv));
    const Config one = Config::parse(kv, "--set");
    one.reject_unknown();
    config_.merge(one);
  }
  if (options.seed) config_.set("run.seed", std::to_string(*options.seed));
  seed_ = config_.get_u64("run.seed");

  out_dir_ = options.out_dir.empty() ? fs::path("runs") / command_ : fs::path(options.out_dir);
  fs::create_directories(out_dir_);
}

fs::path RunContext::resolve(const std::string& path) const {
  const fs::path p(path);
  return p.is_absolute() || base_dir_.empty() ? p : base_dir_ / p;
}

void RunContext::artifact(const std::string& name, const fs::path& path) {
  artifacts_.emplace_back(name, path.string());
}

void RunContext::result(const std::string& name, const std::string& value) { results_.emplace_back(name, value); }

void RunContext::write_manifest() const {
  const fs::path path = out("manifest.txt");
  std::ofstream out(path);
  if (!out) throw Error(fmt::format("{}: cannot write manifest", path.string()));
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  out << "manifest.version=1\n";
  out << fmt::format("manifest.command={}\n", command_);
  out << fmt::format("manifest.seed={}\n", seed_);
  out << fmt::format("manifest.tool_version={}\n", PAT_VERSION);
  out << fmt::format("manifest.wall_clock_s={:.3f}\n", wall);
  for (const auto& [k, v] : artifacts_) out << fmt::format("artifact.{}={}\n", k, v);
  for (const auto& [k, v] : results_) out << fmt::format("result.{}={}\n", k, v);
  out << config_.dump("config.");
}

tracker::TrackerWeights RunContext::load_weights() const {
  const std::string& p = config_.get("input.weights");
  if (p.empty()) throw ConfigError(fmt::format("{}: --weights (input.weights) is required", command_));
  return tracker::load_weights(resolve(p));
}

render::Texture RunContext::load_texture(const std::string& key, int resolution, std::uint64_t seed) const {
  const std::string& spec = config_.get(key);
  if (spec.empty()) throw ConfigError(fmt::format("{}: {} is required", command_, key));
  if (spec.starts_with("pattern:")) {
    const std::string name = spec.substr(8);
    Rng rng(seed);
    if (name == "inert") return render::inert_texture(resolution, rng);
    return render::make_texture(render::parse_pattern(name), resolution, rng);
  }
  return render::load_png(resolve(spec));
}

}  // namespace pat::cli
