#include "pat/attack/loss.hpp"

#include <cmath>

#include <fmt/format.h>

#include "pat/error.hpp"

namespace pat::attack {

using diff::Tape;
using diff::Tensor;
using diff::Var;

namespace {

constexpr std::array<std::string_view, kNumLossTerms> kNames{"nt", "t-", "t=", "t+", "ga-", "ga+"};

// Targets for the targeted losses, as (x_min, y_min, x_max, y_max).
constexpr std::array<double, 4> kTargetMinus{0.0, 0.9, 0.1, 1.0};
constexpr std::array<double, 4> kTargetEqual{0.25, 0.25, 0.75, 0.75};
constexpr std::array<double, 4> kTargetPlus{0.0, 0.0, 1.0, 1.0};

Var box_area(Tape& tape, Var boxes) {
  const Var w = tape.sub(tape.slice(boxes, 1, 2, 3), tape.slice(boxes, 1, 0, 1));
  const Var h = tape.sub(tape.slice(boxes, 1, 3, 4), tape.slice(boxes, 1, 1, 2));
  return tape.mul(w, h);
}

Var l1_to(Tape& tape, Var pred, const std::array<double, 4>& target) {
  const int n = tape.value(pred).dim(0);
  Tensor t({n, 4});
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < 4; ++k) t[static_cast<std::size_t>(i * 4 + k)] = target[static_cast<std::size_t>(k)];
  return tape.sum(tape.abs(tape.sub(pred, tape.leaf(std::move(t)))));
}

}  // namespace

std::string_view loss_term_name(LossTerm t) { return kNames[static_cast<std::size_t>(t)]; }

LossTerm parse_loss_term(std::string_view name) {
  for (std::size_t i = 0; i < kNumLossTerms; ++i) {
    if (kNames[i] == name) return static_cast<LossTerm>(i);
  }
  throw ConfigError(fmt::format("unknown loss term '{}' (expected nt, t-, t=, t+, ga-, ga+)", name));
}

LossSpec LossSpec::pure(LossTerm t) {
  LossSpec s;
  s.weight(t) = 1.0;
  return s;
}

void LossSpec::validate() const {
  bool any = false;
  for (double w : weights) {
    if (!std::isfinite(w)) throw ConfigError("loss weights must be finite");
    any = any || w != 0.0;
  }
  if (!any) throw ConfigError("loss: at least one adversarial weight must be nonzero");
  if (!(w_ps >= 0.0) || !std::isfinite(w_ps)) throw ConfigError(fmt::format("loss.w_ps {} must be >= 0", w_ps));
  if (w_ps > 0.0 && !source_texture) throw ConfigError("loss.w_ps > 0 requires a source texture");
}

Var adversarial_loss(Tape& tape, const LossSpec& spec, Var pred, Var gt) {
  const diff::Shape& ps = tape.value(pred).shape();
  if (ps.size() != 2 || ps[1] != 4 || tape.value(gt).shape() != ps) {
    throw ShapeError(fmt::format("adversarial_loss: pred {} and gt {} must both be [N,4]", diff::shape_str(ps),
                                 diff::shape_str(tape.value(gt).shape())));
  }
  Var total;
  auto accumulate = [&](LossTerm t, auto&& make) {
    const double w = spec.weight(t);
    if (w == 0.0) return;
    const Var term = tape.scale(make(), w);
    total = total.valid() ? tape.add(total, term) : term;
  };
  accumulate(LossTerm::nt, [&] { return tape.scale(tape.sum(tape.abs(tape.sub(pred, gt))), -1.0); });
  accumulate(LossTerm::t_minus, [&] { return l1_to(tape, pred, kTargetMinus); });
  accumulate(LossTerm::t_equal, [&] { return l1_to(tape, pred, kTargetEqual); });
  accumulate(LossTerm::t_plus, [&] { return l1_to(tape, pred, kTargetPlus); });
  accumulate(LossTerm::ga_minus,
             [&] { return tape.sum(tape.min_const(tape.sub(box_area(tape, pred), box_area(tape, gt)), 0.0)); });
  accumulate(LossTerm::ga_plus,
             [&] { return tape.sum(tape.max_const(tape.sub(box_area(tape, pred), box_area(tape, gt)), 0.0)); });
  if (!total.valid()) total = tape.scale(tape.sum(pred), 0.0);
  return total;
}

double perceptual_loss(const render::Texture& texture, const render::Texture& source) {
  return render::rms_distance(texture, source);
}

render::Image perceptual_loss_gradient(const render::Texture& texture, const render::Texture& source) {
  const double rms = render::rms_distance(texture, source);
  render::Image g(texture.width(), texture.height(), 0.0);
  if (rms == 0.0) return g;
  const double scale = 1.0 / (static_cast<double>(texture.size()) * rms);
  for (std::size_t i = 0; i < g.size(); ++i) g.data()[i] = (texture.data()[i] - source.data()[i]) * scale;
  return g;
}

double adversarial_loss(const LossSpec& spec, const BBox& pred, const BBox& gt, const render::Texture* texture) {
  spec.validate();
  Tape tape;
  const Var p = tape.leaf(Tensor({1, 4}, {pred.x_min, pred.y_min, pred.x_max, pred.y_max}));
  const Var g = tape.leaf(Tensor({1, 4}, {gt.x_min, gt.y_min, gt.x_max, gt.y_max}));
  double loss = tape.value(adversarial_loss(tape, spec, p, g)).item();
  if (spec.w_ps > 0.0) {
    if (!texture) throw ConfigError("adversarial_loss: w_ps > 0 needs the texture");
    loss += spec.w_ps * perceptual_loss(*texture, *spec.source_texture);
  }
  return loss;
}

}  // namespace pat::attack
