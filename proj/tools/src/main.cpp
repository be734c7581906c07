#include <filesystem>
#include <functional>
#include <iostream>
#include <map>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "commands.hpp"
#include "pat/attack/presets.hpp"
#include "pat/error.hpp"
#include "pat/platform.hpp"

namespace {

using pat::cli::CommonOptions;
using pat::cli::RunContext;

struct Sub {
  CLI::App* app = nullptr;
  CommonOptions common;
  std::map<std::string, std::string> keyed;  // config key -> flag value
};

void add_common(Sub& s) {
  s.app->add_option("--seed", s.common.seed, "Run seed (overrides run.seed)");
  s.app->add_option("--config", s.common.config_path, "key = value config file or a previous run manifest")
      ->check(CLI::ExistingFile);
  s.app->add_option("--out-dir", s.common.out_dir, "Output directory (default runs/<command>)");
  s.app->add_option("--set", s.common.overrides, "Override a config key: --set key=value");
}

void add_keyed(Sub& s, const std::string& flag, const std::string& key, const std::string& help) {
  s.app->add_option(flag, s.keyed[key], help);
}

// Path flags are stored absolute so the manifest reruns from any directory.
void add_path(Sub& s, const std::string& flag, const std::string& key, const std::string& help) {
  s.app->add_option_function<std::string>(
      flag,
      [&s, key](const std::string& v) {
        s.keyed[key] = v.starts_with("pattern:") ? v : std::filesystem::absolute(v).string();
      },
      help);
}

CommonOptions finalize(Sub& s) {
  CommonOptions o = s.common;
  for (const auto& [k, v] : s.keyed) {
    if (!v.empty()) o.overrides.push_back(k + "=" + v);
  }
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  pat::configure_allocator();

  CLI::App app{"Physical adversarial texture attacks on a toy regression tracker"};
  app.set_version_flag("--version", PAT_VERSION);
  app.require_subcommand(1);

  std::map<std::string, Sub> subs;
  auto sub = [&](const std::string& name, const std::string& help) -> Sub& {
    Sub& s = subs[name];
    s.app = app.add_subcommand(name, help);
    add_common(s);
    return s;
  };

  Sub& train = sub("train", "Train a tracker on synthetic pairs");
  add_keyed(train, "--capacity", "train.capacity", "Lg-lite or Sm-lite");
  add_keyed(train, "--iterations", "train.iterations", "Training iterations");

  Sub& attack = sub("attack", "Optimize an adversarial poster texture");
  add_path(attack, "--weights", "input.weights", "Tracker weights file");
  add_keyed(attack, "--loss", "loss.weights", "Loss weights, e.g. nt:1 or nt:1,t=:1");
  add_keyed(attack, "--iterations", "attack.iterations", "Attack iterations");
  add_path(attack, "--source", "loss.source", "Source image for the perceptual term");
  add_keyed(attack, "--w-ps", "loss.w_ps", "Perceptual similarity weight");
  std::string alpha_profile;
  attack.app->add_option("--alpha-profile", alpha_profile, "Step-size profile: default or fine")
      ->check(CLI::IsMember({"default", "fine"}));

  Sub& eval = sub("eval", "Measure muIOUd of a texture against an inert source");
  add_path(eval, "--texture", "input.texture", "Adversarial texture PNG");
  add_path(eval, "--source", "input.source", "Inert source texture PNG");
  add_path(eval, "--weights", "input.weights", "Tracker weights file");
  add_keyed(eval, "--pairs", "eval.pairs", "Number of sequence pairs");
  bool dump_frames = false;
  eval.app->add_flag("--dump-frames", dump_frames, "Write annotated frames of the first pair");

  Sub& ablate = sub("ablate", "Attack and evaluate under EOT ablation presets");
  add_path(ablate, "--weights", "input.weights", "Tracker weights file");
  add_keyed(ablate, "--iterations", "attack.iterations", "Attack iterations per preset");
  std::vector<std::string> presets;
  ablate.app->add_option("--preset", presets, "Preset name (repeatable; default all)");
  bool list = false;
  ablate.app->add_flag("--list", list, "Print the preset names and exit");

  sub("gradcheck", "Finite-difference check of the render/track/loss gradients");

  Sub& servo = sub("servo", "Closed-loop PID servoing simulation");
  add_path(servo, "--texture", "input.texture", "Poster texture PNG or pattern:<name>");
  add_path(servo, "--weights", "input.weights", "Tracker weights file");
  add_keyed(servo, "--steps", "servo.steps", "Number of control steps");
  bool zero_gains = false;
  servo.app->add_flag("--zero-gains", zero_gains, "Set every PID gain to zero");

  Sub& preview = sub("preview", "Render sample scene pairs with ground-truth boxes");
  add_path(preview, "--texture", "input.texture", "Poster texture PNG or pattern:<name>");
  add_keyed(preview, "--count", "preview.count", "Number of scene pairs");

  CLI11_PARSE(app, argc, argv);

  try {
    if (ablate.app->parsed() && list) {
      for (std::string_view p : pat::attack::preset_names()) std::cout << p << "\n";
      return 0;
    }
    if (attack.app->parsed() && !alpha_profile.empty()) {
      attack.keyed["attack.alpha_schedule"] = alpha_profile == "fine" ? "500:0.075,inf:0.025" : "500:0.75,inf:0.25";
    }
    if (ablate.app->parsed() && !presets.empty()) {
      std::string joined;
      for (const auto& p : presets) joined += (joined.empty() ? "" : ",") + p;
      ablate.keyed["ablate.presets"] = joined;
    }
    if (servo.app->parsed() && zero_gains) {
      for (const char* ch : {"lateral", "forward", "vertical"}) {
        for (const char* g : {"kp", "ki", "kd"}) servo.keyed[fmt::format("servo.{}.{}", ch, g)] = "0";
      }
    }

    for (auto& [name, s] : subs) {
      if (!s.app->parsed()) continue;
      RunContext run(name, finalize(s));
      int rc = 0;
      if (name == "train") rc = pat::cli::cmd_train(run);
      else if (name == "attack") rc = pat::cli::cmd_attack(run);
      else if (name == "eval") rc = pat::cli::cmd_eval(run, dump_frames);
      else if (name == "ablate") rc = pat::cli::cmd_ablate(run);
      else if (name == "gradcheck") rc = pat::cli::cmd_gradcheck(run);
      else if (name == "servo") rc = pat::cli::cmd_servo(run);
      else if (name == "preview") rc = pat::cli::cmd_preview(run);
      run.write_manifest();
      return rc;
    }
  } catch (const pat::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
