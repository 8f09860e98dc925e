#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mpgan/data.hpp"
#include "mpgan/nets.hpp"

// One conditional WGAN-GP per patch. The generator maps (denoised text,
// noise) to patch features; the discriminator shares one encoder layer
// between a scalar critic column and per-seen-class logit columns (output
// column 0 is the critic, columns 1.. are the class logits). Training
// alternates critic and generator steps; afterwards the generator
// synthesises unseen-class features.

namespace mpgan {

struct DenoiserConfig {
  enum class Kind { pca, fc };
  Kind kind = Kind::fc;
  std::size_t dim = 1000;  // pca: retained components, fc: layer width
};

struct GanConfig {
  std::size_t z_dim = 100;
  DenoiserConfig denoiser;
  std::size_t n_critic = 5;
  std::size_t batch_size = 64;
  std::size_t iterations = 1000;
  double lambda_pivot = 1.0;
  double beta_gp = 10.0;
  std::size_t gen_hidden = 64;
  std::size_t disc_hidden = 64;
  double lr = 1e-4;
  // Scales the critic and classification terms of the generator objective;
  // 0 reduces generator training to pure pivot regression (diagnostics).
  double adversarial_scale = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct PatchGan {
  std::size_t patch_index = 0;
  GanConfig cfg;
  std::size_t feat_dim = 0;
  std::size_t cond_dim = 0;  // semantic dim as fed to the gan
  std::size_t n_seen = 0;
  Mlp generator;                 // [den_dim + z, hidden, feat_dim], ReLU output
  std::optional<Mlp> denoiser;   // fc variant: [cond_dim -> fc dim], leaky output
  Mlp discriminator;             // [feat_dim, hidden, 1 + n_seen]
  AdamState gen_opt, disc_opt;
  std::optional<AdamState> den_opt;

  std::size_t denoised_dim() const {
    return denoiser ? cfg.denoiser.dim : cond_dim;
  }
  // Runs the fc denoiser, or passes raw vectors through for the pca variant.
  Matrix denoise(const Matrix& phi) const;
};

PatchGan make_patch_gan(std::size_t patch_index, std::size_t feat_dim, std::size_t cond_dim,
                        std::size_t n_seen, const GanConfig& cfg);

struct GenLossResult {
  double loss = 0.0;
  double critic_term = 0.0;  // -mean critic(fake)
  double cls_term = 0.0;     // xent of classifier logits on fake
  double pivot_term = 0.0;   // mean squared distance to the class pivot
  MlpGrads gen_grads;
  std::optional<MlpGrads> den_grads;
};

// Eq: loss = adv*(-mean critic(fake) + xent(cls(fake), y)) + lambda * pivot.
// Labels are class ids; pivots supply both the regression targets and the
// classifier column order. Discriminator parameters receive no gradient.
GenLossResult generator_loss(const PatchGan& gan, const Matrix& phi,
                             const std::vector<int>& labels, const VisualPivots& pivots,
                             const Matrix& z);

struct DiscLossResult {
  double loss = 0.0;
  double cls_term = 0.0;          // (xent(fake) + xent(real)) / 2
  double gp_term = 0.0;           // raw mean (||grad||-1)^2, before beta
  double wasserstein_term = 0.0;  // mean critic(fake) - mean critic(real)
  MlpGrads disc_grads;
};

// Eq: loss = cls_term + beta*gp + mean critic(fake) - mean critic(real),
// with the penalty taken at per-sample interpolates u*fake + (1-u)*real.
// Generator parameters receive no gradient.
DiscLossResult discriminator_loss(const PatchGan& gan, const Matrix& phi,
                                  const std::vector<int>& labels, const Matrix& real,
                                  const VisualPivots& pivots, const Matrix& z, const Vector& u);

struct TraceRow {
  std::size_t step = 0;
  double d_loss = 0.0;
  double g_loss = 0.0;
  double gp = 0.0;
  double pivot = 0.0;
};

using LossTrace = std::vector<TraceRow>;
void save_trace(const LossTrace& trace, const std::filesystem::path& path);

// Runs cfg.iterations outer steps: n_critic critic updates on fresh
// minibatches, then one generator update. Deterministic under cfg.seed.
LossTrace train_patch(PatchGan& gan, const PatchFeatureBank& bank,
                      const SemanticEmbedding& embedding, const ClassSplit& split,
                      const VisualPivots& pivots);

// n fresh-noise draws conditioned on one class vector.
Matrix synthesize(const PatchGan& gan, const double* phi_class, std::size_t n, Rng& noise);

void save_patch_gan(const PatchGan& gan, const std::filesystem::path& path);
PatchGan load_patch_gan(const std::filesystem::path& path);

std::string gan_config_to_json_string(const GanConfig& c);
GanConfig gan_config_from_json_string(const std::string& text);

}  // namespace mpgan
