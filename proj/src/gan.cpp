#include "mpgan/gan.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "mpgan/errors.hpp"
#include "mpgan/io.hpp"

namespace mpgan {

using nlohmann::json;

void GanConfig::validate() const {
  if (lambda_pivot < 0.0) throw ConfigError("lambda_pivot must be >= 0");
  if (beta_gp < 0.0) throw ConfigError("beta_gp must be >= 0");
  if (n_critic < 1) throw ConfigError("n_critic must be >= 1");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (z_dim < 1) throw ConfigError("z_dim must be >= 1");
  if (denoiser.dim < 1) throw ConfigError("denoiser dim must be >= 1");
}

PatchGan make_patch_gan(std::size_t patch_index, std::size_t feat_dim, std::size_t cond_dim,
                        std::size_t n_seen, const GanConfig& cfg) {
  cfg.validate();
  if (feat_dim == 0 || cond_dim == 0 || n_seen == 0)
    throw DimensionMismatch("patch gan needs non-zero feature, conditioning and class dims");

  PatchGan gan;
  gan.patch_index = patch_index;
  gan.cfg = cfg;
  gan.feat_dim = feat_dim;
  gan.cond_dim = cond_dim;
  gan.n_seen = n_seen;

  const Rng root(cfg.seed);
  if (cfg.denoiser.kind == DenoiserConfig::Kind::fc) {
    gan.denoiser = make_mlp({cond_dim, cfg.denoiser.dim}, Activation::leaky_relu,
                            Activation::leaky_relu, root.substream("denoiser"));
    gan.den_opt = make_adam(*gan.denoiser, AdamConfig{.lr = cfg.lr});
  }
  gan.generator = make_mlp({gan.denoised_dim() + cfg.z_dim, cfg.gen_hidden, feat_dim},
                           Activation::leaky_relu, Activation::relu, root.substream("generator"));
  gan.discriminator = make_mlp({feat_dim, cfg.disc_hidden, 1 + n_seen}, Activation::leaky_relu,
                               Activation::identity, root.substream("discriminator"));
  gan.gen_opt = make_adam(gan.generator, AdamConfig{.lr = cfg.lr});
  gan.disc_opt = make_adam(gan.discriminator, AdamConfig{.lr = cfg.lr});
  return gan;
}

Matrix PatchGan::denoise(const Matrix& phi) const {
  return denoiser ? forward(*denoiser, phi) : phi;
}

namespace {

Matrix concat_cols(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows, a.cols + b.cols);
  for (std::size_t i = 0; i < a.rows; ++i) {
    double* o = out.row(i);
    const double* ar = a.row(i);
    const double* br = b.row(i);
    for (std::size_t j = 0; j < a.cols; ++j) o[j] = ar[j];
    for (std::size_t j = 0; j < b.cols; ++j) o[a.cols + j] = br[j];
  }
  return out;
}

// Splits discriminator output columns into the critic score and class logits.
Matrix class_logits(const Matrix& disc_out) {
  Matrix logits(disc_out.rows, disc_out.cols - 1);
  for (std::size_t i = 0; i < disc_out.rows; ++i)
    for (std::size_t j = 0; j + 1 < disc_out.cols; ++j) logits(i, j) = disc_out(i, j + 1);
  return logits;
}

struct FakeForward {
  ForwardCache den_cache;
  ForwardCache gen_cache;
  Matrix gen_input;
  const Matrix* fake = nullptr;
};

const Matrix& run_generator(const PatchGan& gan, const Matrix& phi, const Matrix& z,
                            FakeForward& ff) {
  const Matrix* cond = &phi;
  if (gan.denoiser) cond = &forward(*gan.denoiser, phi, ff.den_cache);
  ff.gen_input = concat_cols(*cond, z);
  ff.fake = &forward(gan.generator, ff.gen_input, ff.gen_cache);
  return *ff.fake;
}

std::vector<int> pivot_indices(const VisualPivots& pivots, const std::vector<int>& labels) {
  std::vector<int> idx(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i)
    idx[i] = static_cast<int>(pivots.index_of(labels[i]));
  return idx;
}

}  // namespace

GenLossResult generator_loss(const PatchGan& gan, const Matrix& phi,
                             const std::vector<int>& labels, const VisualPivots& pivots,
                             const Matrix& z) {
  if (phi.rows != z.rows || phi.rows != labels.size())
    throw BatchMismatch("generator_loss: phi, z and labels disagree on batch size");
  if (pivots.n_classes() != gan.n_seen)
    throw DimensionMismatch("pivot class count does not match classifier head width");

  const std::size_t b = phi.rows;
  const std::vector<int> idx = pivot_indices(pivots, labels);

  FakeForward ff;
  const Matrix& fake = run_generator(gan, phi, z, ff);

  ForwardCache disc_cache;
  const Matrix& disc_out = forward(gan.discriminator, fake, disc_cache);

  GenLossResult res;
  for (std::size_t i = 0; i < b; ++i) res.critic_term -= disc_out(i, 0);
  res.critic_term /= static_cast<double>(b);

  const XentResult xent = softmax_xent(class_logits(disc_out), idx);
  res.cls_term = xent.loss;

  Matrix d_fake(b, gan.feat_dim);
  for (std::size_t i = 0; i < b; ++i) {
    const double* f = fake.row(i);
    const double* pv = pivots.pivot(gan.patch_index, static_cast<std::size_t>(idx[i]));
    double* g = d_fake.row(i);
    for (std::size_t d = 0; d < gan.feat_dim; ++d) {
      const double diff = f[d] - pv[d];
      res.pivot_term += diff * diff;
      g[d] = gan.cfg.lambda_pivot * 2.0 * diff / static_cast<double>(b);
    }
  }
  res.pivot_term /= static_cast<double>(b);

  const double adv = gan.cfg.adversarial_scale;
  res.loss = adv * (res.critic_term + res.cls_term) + gan.cfg.lambda_pivot * res.pivot_term;

  // Pull the adversarial gradient back through the (frozen) discriminator.
  Matrix disc_out_grad(b, 1 + gan.n_seen);
  for (std::size_t i = 0; i < b; ++i) {
    disc_out_grad(i, 0) = -adv / static_cast<double>(b);
    for (std::size_t j = 0; j < gan.n_seen; ++j)
      disc_out_grad(i, j + 1) = adv * xent.grad_logits(i, j);
  }
  MlpGrads disc_scratch = zero_grads(gan.discriminator);
  Matrix d_fake_adv = backward(gan.discriminator, disc_cache, disc_out_grad, disc_scratch);
  for (std::size_t i = 0; i < d_fake.size(); ++i) d_fake.data[i] += d_fake_adv.data[i];

  res.gen_grads = zero_grads(gan.generator);
  Matrix d_gen_in = backward(gan.generator, ff.gen_cache, d_fake, res.gen_grads);

  if (gan.denoiser) {
    Matrix d_cond(b, gan.denoised_dim());
    for (std::size_t i = 0; i < b; ++i)
      for (std::size_t j = 0; j < d_cond.cols; ++j) d_cond(i, j) = d_gen_in(i, j);
    res.den_grads = zero_grads(*gan.denoiser);
    backward(*gan.denoiser, ff.den_cache, d_cond, *res.den_grads);
  }
  return res;
}

DiscLossResult discriminator_loss(const PatchGan& gan, const Matrix& phi,
                                  const std::vector<int>& labels, const Matrix& real,
                                  const VisualPivots& pivots, const Matrix& z, const Vector& u) {
  const std::size_t b = phi.rows;
  if (real.rows != b || z.rows != b || labels.size() != b || u.size() != b)
    throw BatchMismatch("discriminator_loss: batch sizes disagree");
  if (real.cols != gan.feat_dim)
    throw DimensionMismatch("real batch feature dim does not match the gan");

  const std::vector<int> idx = pivot_indices(pivots, labels);

  FakeForward ff;
  const Matrix& fake = run_generator(gan, phi, z, ff);

  ForwardCache fake_cache, real_cache;
  const Matrix fake_out = forward(gan.discriminator, fake, fake_cache);
  const Matrix real_out = forward(gan.discriminator, real, real_cache);

  DiscLossResult res;
  res.disc_grads = zero_grads(gan.discriminator);

  const XentResult xent_fake = softmax_xent(class_logits(fake_out), idx);
  const XentResult xent_real = softmax_xent(class_logits(real_out), idx);
  res.cls_term = 0.5 * (xent_fake.loss + xent_real.loss);

  for (std::size_t i = 0; i < b; ++i)
    res.wasserstein_term += fake_out(i, 0) - real_out(i, 0);
  res.wasserstein_term /= static_cast<double>(b);

  Matrix interp(b, gan.feat_dim);
  for (std::size_t i = 0; i < b; ++i)
    for (std::size_t d = 0; d < gan.feat_dim; ++d)
      interp(i, d) = u[i] * fake(i, d) + (1.0 - u[i]) * real(i, d);
  GradientPenaltyResult gp = gradient_penalty_selected(gan.discriminator, interp, 0);
  res.gp_term = gp.penalty;

  res.loss = res.cls_term + gan.cfg.beta_gp * res.gp_term + res.wasserstein_term;

  Matrix fake_grad(b, 1 + gan.n_seen);
  Matrix real_grad(b, 1 + gan.n_seen);
  for (std::size_t i = 0; i < b; ++i) {
    fake_grad(i, 0) = 1.0 / static_cast<double>(b);
    real_grad(i, 0) = -1.0 / static_cast<double>(b);
    for (std::size_t j = 0; j < gan.n_seen; ++j) {
      fake_grad(i, j + 1) = 0.5 * xent_fake.grad_logits(i, j);
      real_grad(i, j + 1) = 0.5 * xent_real.grad_logits(i, j);
    }
  }
  backward(gan.discriminator, fake_cache, fake_grad, res.disc_grads);
  backward(gan.discriminator, real_cache, real_grad, res.disc_grads);
  res.disc_grads.accumulate(gp.param_grads, gan.cfg.beta_gp);
  return res;
}

void save_trace(const LossTrace& trace, const std::filesystem::path& path) {
  std::ostringstream os;
  os.precision(17);
  os << "step,d_loss,g_loss,gp,pivot\n";
  for (const auto& row : trace)
    os << row.step << ',' << row.d_loss << ',' << row.g_loss << ',' << row.gp << ','
       << row.pivot << '\n';
  io::atomic_write_file(path, os.str());
}

LossTrace train_patch(PatchGan& gan, const PatchFeatureBank& bank,
                      const SemanticEmbedding& embedding, const ClassSplit& split,
                      const VisualPivots& pivots) {
  const bool wants_raw = gan.denoiser.has_value();
  const bool is_raw = embedding.stage == EmbeddingStage::raw_tfidf;
  if (wants_raw != is_raw)
    throw ConfigError(wants_raw ? "fc denoiser expects a raw embedding"
                                : "pca denoiser expects an already-denoised embedding");
  if (embedding.dim != gan.cond_dim)
    throw DimensionMismatch("embedding dim does not match the gan conditioning dim");
  if (gan.patch_index >= bank.n_patches)
    throw PatchCountMismatch("gan patch index outside the bank");

  std::vector<std::size_t> seen_samples;
  for (std::size_t s = 0; s < bank.n_samples(); ++s)
    if (split.is_seen(bank.labels[s])) seen_samples.push_back(s);
  if (seen_samples.empty()) throw MissingClass("no seen samples to train on");

  if (gan.cfg.iterations == 0) return {};

  // Warm-start a fresh generator's output bias at the mean real feature of
  // this patch; the optimiser then fits class-conditional residuals instead
  // of spending its step budget on absolute scale.
  if (gan.gen_opt.step == 0) {
    Vector mean(gan.feat_dim, 0.0);
    for (std::size_t s : seen_samples) {
      const double* feat = bank.patch(s, gan.patch_index);
      for (std::size_t d = 0; d < gan.feat_dim; ++d) mean[d] += feat[d];
    }
    Vector& bias = gan.generator.layers.back().b;
    for (std::size_t d = 0; d < gan.feat_dim; ++d)
      bias[d] = std::max(0.0, mean[d] / static_cast<double>(seen_samples.size()));
  }

  const std::size_t b = gan.cfg.batch_size;
  const Rng root(gan.cfg.seed);
  Rng batch_rng = root.substream("minibatch");
  Rng noise_rng = root.substream("noise");
  Rng interp_rng = root.substream("interp");

  auto draw_batch = [&](Matrix& phi, std::vector<int>& labels, Matrix* real) {
    phi = Matrix(b, gan.cond_dim);
    labels.resize(b);
    if (real) *real = Matrix(b, gan.feat_dim);
    for (std::size_t i = 0; i < b; ++i) {
      const std::size_t s = seen_samples[batch_rng.uniform_index(seen_samples.size())];
      labels[i] = bank.labels[s];
      const double* vec = embedding.vector_of(labels[i]);
      std::copy(vec, vec + gan.cond_dim, phi.row(i));
      if (real) {
        const double* feat = bank.patch(s, gan.patch_index);
        std::copy(feat, feat + gan.feat_dim, real->row(i));
      }
    }
  };

  auto draw_noise = [&](Matrix& z) {
    z = Matrix(b, gan.cfg.z_dim);
    for (double& v : z.data) v = noise_rng.normal();
  };

  LossTrace trace;
  trace.reserve(gan.cfg.iterations);

  for (std::size_t step = 0; step < gan.cfg.iterations; ++step) {
    TraceRow row;
    row.step = step;

    for (std::size_t c = 0; c < gan.cfg.n_critic; ++c) {
      Matrix phi, real, z;
      std::vector<int> labels;
      draw_batch(phi, labels, &real);
      draw_noise(z);
      Vector u(b);
      for (double& v : u) v = interp_rng.uniform01();

      DiscLossResult d = discriminator_loss(gan, phi, labels, real, pivots, z, u);
      if (!std::isfinite(d.loss))
        throw NonFiniteLoss("discriminator loss at patch " + std::to_string(gan.patch_index) +
                            ", step " + std::to_string(step));
      adam_step(gan.disc_opt, gan.discriminator, d.disc_grads);
      row.d_loss = d.loss;
      row.gp = d.gp_term;
    }

    Matrix phi, z;
    std::vector<int> labels;
    draw_batch(phi, labels, nullptr);
    draw_noise(z);
    GenLossResult g = generator_loss(gan, phi, labels, pivots, z);
    if (!std::isfinite(g.loss))
      throw NonFiniteLoss("generator loss at patch " + std::to_string(gan.patch_index) +
                          ", step " + std::to_string(step));
    adam_step(gan.gen_opt, gan.generator, g.gen_grads);
    if (gan.denoiser) adam_step(*gan.den_opt, *gan.denoiser, *g.den_grads);
    row.g_loss = g.loss;
    row.pivot = g.pivot_term;
    trace.push_back(row);
  }
  return trace;
}

Matrix synthesize(const PatchGan& gan, const double* phi_class, std::size_t n, Rng& noise) {
  Matrix out(n, gan.feat_dim);
  if (n == 0) return out;

  Matrix phi(1, gan.cond_dim);
  std::copy(phi_class, phi_class + gan.cond_dim, phi.row(0));
  const Matrix cond = gan.denoise(phi);

  Matrix input(n, gan.denoised_dim() + gan.cfg.z_dim);
  for (std::size_t i = 0; i < n; ++i) {
    double* row = input.row(i);
    std::copy(cond.row(0), cond.row(0) + cond.cols, row);
    for (std::size_t d = 0; d < gan.cfg.z_dim; ++d) row[cond.cols + d] = noise.normal();
  }
  return forward(gan.generator, input);
}

namespace {

json denoiser_to_json(const DenoiserConfig& d) {
  return json{{"kind", d.kind == DenoiserConfig::Kind::fc ? "fc" : "pca"}, {"dim", d.dim}};
}

DenoiserConfig denoiser_from_json(const json& j) {
  DenoiserConfig d;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "fc")
    d.kind = DenoiserConfig::Kind::fc;
  else if (kind == "pca")
    d.kind = DenoiserConfig::Kind::pca;
  else
    throw ConfigError("unknown denoiser kind: " + kind);
  d.dim = j.at("dim").get<std::size_t>();
  return d;
}

json gan_config_to_json(const GanConfig& c) {
  json j;
  j["z_dim"] = c.z_dim;
  j["denoiser"] = denoiser_to_json(c.denoiser);
  j["n_critic"] = c.n_critic;
  j["batch_size"] = c.batch_size;
  j["iterations"] = c.iterations;
  j["lambda_pivot"] = c.lambda_pivot;
  j["beta_gp"] = c.beta_gp;
  j["gen_hidden"] = c.gen_hidden;
  j["disc_hidden"] = c.disc_hidden;
  j["lr"] = c.lr;
  j["adversarial_scale"] = c.adversarial_scale;
  j["seed"] = c.seed;
  return j;
}

GanConfig gan_config_from_json(const json& j) {
  GanConfig c;
  c.z_dim = j.value("z_dim", c.z_dim);
  if (j.contains("denoiser")) c.denoiser = denoiser_from_json(j.at("denoiser"));
  c.n_critic = j.value("n_critic", c.n_critic);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.iterations = j.value("iterations", c.iterations);
  c.lambda_pivot = j.value("lambda_pivot", c.lambda_pivot);
  c.beta_gp = j.value("beta_gp", c.beta_gp);
  c.gen_hidden = j.value("gen_hidden", c.gen_hidden);
  c.disc_hidden = j.value("disc_hidden", c.disc_hidden);
  c.lr = j.value("lr", c.lr);
  c.adversarial_scale = j.value("adversarial_scale", c.adversarial_scale);
  c.seed = j.value("seed", c.seed);
  c.validate();
  return c;
}

}  // namespace

std::string gan_config_to_json_string(const GanConfig& c) {
  return gan_config_to_json(c).dump();
}

GanConfig gan_config_from_json_string(const std::string& text) {
  try {
    return gan_config_from_json(json::parse(text));
  } catch (const json::exception& e) {
    throw ConfigError("gan config is not valid JSON: " + std::string(e.what()));
  }
}

void save_patch_gan(const PatchGan& gan, const std::filesystem::path& path) {
  json meta;
  meta["patch_index"] = gan.patch_index;
  meta["feat_dim"] = gan.feat_dim;
  meta["cond_dim"] = gan.cond_dim;
  meta["n_seen"] = gan.n_seen;
  meta["config"] = gan_config_to_json(gan.cfg);
  meta["step"] = gan.gen_opt.step;

  std::vector<const Mlp*> nets{&gan.generator, &gan.discriminator};
  if (gan.denoiser) nets.push_back(&*gan.denoiser);
  save_checkpoint(path, meta.dump(), nets);
}

PatchGan load_patch_gan(const std::filesystem::path& path) {
  std::vector<Mlp> nets;
  const std::string meta_text = load_checkpoint(path, nets);
  json meta;
  try {
    meta = json::parse(meta_text);
  } catch (const json::exception& e) {
    throw FormatError("gan checkpoint metadata is not valid JSON: " + std::string(e.what()));
  }

  PatchGan gan;
  gan.patch_index = meta.at("patch_index").get<std::size_t>();
  gan.feat_dim = meta.at("feat_dim").get<std::size_t>();
  gan.cond_dim = meta.at("cond_dim").get<std::size_t>();
  gan.n_seen = meta.at("n_seen").get<std::size_t>();
  gan.cfg = gan_config_from_json(meta.at("config"));

  const bool has_den = gan.cfg.denoiser.kind == DenoiserConfig::Kind::fc;
  if (nets.size() != (has_den ? 3u : 2u))
    throw FormatError("gan checkpoint has an unexpected net count");
  gan.generator = std::move(nets[0]);
  gan.discriminator = std::move(nets[1]);
  if (has_den) gan.denoiser = std::move(nets[2]);

  gan.gen_opt = make_adam(gan.generator, AdamConfig{.lr = gan.cfg.lr});
  gan.disc_opt = make_adam(gan.discriminator, AdamConfig{.lr = gan.cfg.lr});
  if (gan.denoiser) gan.den_opt = make_adam(*gan.denoiser, AdamConfig{.lr = gan.cfg.lr});
  return gan;
}

}  // namespace mpgan
