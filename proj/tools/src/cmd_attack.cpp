#include <cstdio>
#include <limits>

#include <fmt/format.h>

#include "commands.hpp"
#include "pat/attack/attack.hpp"
#include "pat/attack/presets.hpp"
#include "pat/csv.hpp"
#include "pat/error.hpp"
#include "pat/eval/sequence.hpp"
#include "svg_chart.hpp"

namespace pat::cli {

namespace fs = std::filesystem;

namespace {

void check_weights(const Config& c, const tracker::TrackerWeights& w) {
  const tracker::Capacity expected = tracker::parse_capacity(c.get("attack.capacity"));
  if (w.capacity != expected) {
    throw ConfigError(fmt::format("weights are {}, attack.capacity is {}", tracker::capacity_name(w.capacity),
                                  tracker::capacity_name(expected)));
  }
  if (w.crop_resolution != c.get_int("train.crop_resolution")) {
    throw ConfigError(fmt::format("weights use crop resolution {}, train.crop_resolution is {}", w.crop_resolution,
                                  c.get_int("train.crop_resolution")));
  }
}

std::string optional_field(const std::optional<double>& v) {
  return v ? fmt::format("{:.17g}", *v) : std::string();
}

}  // namespace

int cmd_attack(RunContext& run) {
  const Config& c = run.config();
  const tracker::TrackerWeights weights = run.load_weights();
  check_weights(c, weights);
  const attack::AttackConfig ac = attack_config_from(c, run.base_dir());
  const render::Texture chi0 = attack::initial_texture(ac);
  const int eval_every = c.get_int("attack.eval_every");
  const int eval_pairs = c.get_int("attack.eval_pairs");
  const std::uint64_t eval_seed = c.get_u64("eval.seed");
  const eval::TraversalOptions topts = traversal_options_from(c);
  const int every = std::max(1, ac.iterations / 20);

  auto monitor = [&](int it, const render::Texture& chi) -> std::optional<double> {
    std::optional<double> mu;
    if (eval_every > 0 && (it % eval_every == 0 || it == ac.iterations)) {
      mu = eval::evaluate_texture(chi, chi0, weights, ac.dist, eval_pairs, eval_seed, topts).mean_mu_ioud;
    }
    if (it % every == 0 || it == ac.iterations) {
      fmt::print("iter {:>5}{}\n", it, mu ? fmt::format("  muIOUd {:.4f}", *mu) : std::string());
      std::fflush(stdout);
    }
    return mu;
  };
  const attack::AttackRun result = attack::run_attack(ac, weights, monitor);

  render::save_png(result.initial, run.out("texture_initial.png"));
  render::save_png(result.final_texture, run.out("texture.png"));
  run.artifact("texture_initial", run.out("texture_initial.png"));
  run.artifact("texture", run.out("texture.png"));

  fs::create_directories(run.out("snapshots"));
  for (const auto& [it, tex] : result.snapshots) {
    render::save_png(tex, run.out(fmt::format("snapshots/iter_{:05d}.png", it)));
  }
  if (!result.snapshots.empty()) run.artifact("snapshots", run.out("snapshots"));

  CsvWriter hist(run.out("history.csv"),
                 {"iteration", "alpha", "mean_loss", "scenes_used", "scenes_skipped", "mu_ioud"});
  Series loss{"mean loss", {}, {}}, mu{"muIOUd", {}, {}};
  for (const attack::AttackIteration& h : result.history) {
    hist.write(h.iteration, h.alpha, h.mean_loss, h.scenes_used, h.scenes_skipped, optional_field(h.mu_ioud));
    loss.x.push_back(h.iteration);
    loss.y.push_back(h.mean_loss);
    if (h.mu_ioud) {
      mu.x.push_back(h.iteration);
      mu.y.push_back(*h.mu_ioud);
    }
  }
  run.artifact("history_csv", run.out("history.csv"));
  write_svg_chart(run.out("loss.svg"), "Attack loss", "iteration", "E[L]", {loss});
  run.artifact("loss_svg", run.out("loss.svg"));
  if (!mu.x.empty()) {
    write_svg_chart(run.out("mu_ioud.svg"), "Adversarial strength", "iteration", "muIOUd", {mu});
    run.artifact("mu_ioud_svg", run.out("mu_ioud.svg"));
    run.result("final_mu_ioud", fmt::format("{:.6f}", mu.y.back()));
    fmt::print("final muIOUd {:.4f}\n", mu.y.back());
  }
  if (ac.loss.source_texture) {
    const double d = render::rms_distance(result.final_texture, *ac.loss.source_texture);
    run.result("final_rms_to_source", fmt::format("{:.6f}", d));
    fmt::print("RMS distance to source {:.4f}\n", d);
  }
  return 0;
}

int cmd_ablate(RunContext& run) {
  const Config& c = run.config();
  const tracker::TrackerWeights weights = run.load_weights();
  check_weights(c, weights);
  const attack::AttackConfig base = attack_config_from(c, run.base_dir());
  const int eval_every = c.get_int("ablate.eval_every");
  const int eval_pairs = c.get_int("ablate.eval_pairs");
  if (eval_every < 1) throw ConfigError("ablate.eval_every must be >= 1");
  const std::uint64_t eval_seed = c.get_u64("eval.seed");
  const eval::TraversalOptions topts = traversal_options_from(c);

  std::vector<std::string> names;
  const std::vector<std::string> requested = c.get_list("ablate.presets");
  if (requested.size() == 1 && requested[0] == "all") {
    for (std::string_view p : attack::preset_names()) names.emplace_back(p);
  } else {
    names = requested;
  }
  for (const auto& n : names) attack::ablation_preset(n, base.dist);  // fail fast on unknown names

  fs::create_directories(run.out("textures"));
  CsvWriter csv(run.out("ablation.csv"), {"preset", "iteration", "mu_ioud"});
  std::vector<Series> series;
  for (const std::string& name : names) {
    attack::AttackConfig ac = base;
    ac.dist = attack::ablation_preset(name, base.dist);
    ac.snapshot_every = 0;
    const render::Texture chi0 = attack::initial_texture(ac);
    // Strength is always measured under the unablated distribution.
    auto measure = [&](const render::Texture& chi) {
      return eval::evaluate_texture(chi, chi0, weights, base.dist, eval_pairs, eval_seed, topts).mean_mu_ioud;
    };
    Series s{name, {0.0}, {measure(chi0)}};
    csv.write(name, 0, s.y.back());
    auto monitor = [&](int it, const render::Texture& chi) -> std::optional<double> {
      if (it % eval_every != 0 && it != ac.iterations) return std::nullopt;
      const double mu = measure(chi);
      csv.write(name, it, mu);
      s.x.push_back(it);
      s.y.push_back(mu);
      return mu;
    };
    const attack::AttackRun r = attack::run_attack(ac, weights, monitor);
    render::save_png(r.final_texture, run.out(fmt::format("textures/{}.png", name)));
    fmt::print("{:<14} final muIOUd {:.4f}\n", name, s.y.back());
    std::fflush(stdout);
    run.result(fmt::format("final_mu_ioud.{}", name), fmt::format("{:.6f}", s.y.back()));
    series.push_back(std::move(s));
  }
  run.artifact("ablation_csv", run.out("ablation.csv"));
  run.artifact("textures", run.out("textures"));
  write_svg_chart(run.out("ablation.svg"), "EOT ablation", "iteration", "muIOUd", series);
  run.artifact("ablation_svg", run.out("ablation.svg"));
  return 0;
}

}  // namespace pat::cli
