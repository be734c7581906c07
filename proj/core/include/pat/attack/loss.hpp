#pragma once

#include <array>
#include <optional>
#include <string_view>

#include "pat/bbox.hpp"
#include "pat/diff/tape.hpp"
#include "pat/render/image.hpp"

namespace pat::attack {

enum class LossTerm { nt, t_minus, t_equal, t_plus, ga_minus, ga_plus };
inline constexpr std::size_t kNumLossTerms = 6;

// Config names: nt, t-, t=, t+, ga-, ga+.
std::string_view loss_term_name(LossTerm t);
LossTerm parse_loss_term(std::string_view name);

struct LossSpec {
  std::array<double, kNumLossTerms> weights{};  // indexed by LossTerm
  double w_ps = 0.0;
  std::optional<render::Texture> source_texture;

  double& weight(LossTerm t) { return weights[static_cast<std::size_t>(t)]; }
  double weight(LossTerm t) const { return weights[static_cast<std::size_t>(t)]; }

  static LossSpec pure(LossTerm t);
  // Throws ConfigError: no nonzero adversarial weight, negative w_ps, or
  // w_ps > 0 without a source texture.
  void validate() const;
};

// Adversarial part w . [L_nt, L_t-, L_t=, L_t+, L_ga-, L_ga+] for a batch of
// predictions [N, 4] against constant ground truth [N, 4], summed over the
// batch. L1 norms sum over the four coordinates.
diff::Var adversarial_loss(diff::Tape& tape, const LossSpec& spec, diff::Var pred, diff::Var gt);

// L_ps = RMS distance between texture and source over all texels and
// channels. Zero gradient at the source.
double perceptual_loss(const render::Texture& texture, const render::Texture& source);
render::Image perceptual_loss_gradient(const render::Texture& texture, const render::Texture& source);

// Full loss for one prediction: adversarial terms plus w_ps * L_ps.
double adversarial_loss(const LossSpec& spec, const BBox& pred, const BBox& gt, const render::Texture* texture = nullptr);

}  // namespace pat::attack
