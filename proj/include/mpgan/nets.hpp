#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "mpgan/linalg.hpp"
#include "mpgan/rng.hpp"

// Minimal dense-net core: affine layers, leaky-ReLU/ReLU activations,
// softmax cross-entropy, analytic reverse-mode gradients, the second-order
// path needed by the WGAN gradient penalty, and Adam. Batches are row-major
// (one sample per row); all math is f64.

namespace mpgan {

inline constexpr double kLeakySlope = 0.2;

enum class Activation { identity, relu, leaky_relu };
std::string to_string(Activation a);
Activation activation_from_string(const std::string& s);

struct Dense {
  Matrix w;  // out x in
  Vector b;  // out
};

struct Mlp {
  std::vector<Dense> layers;
  Activation hidden = Activation::leaky_relu;
  Activation output = Activation::identity;

  std::size_t input_dim() const { return layers.front().w.cols; }
  std::size_t output_dim() const { return layers.back().w.rows; }
  std::size_t n_params() const;
  Activation activation_of(std::size_t layer) const {
    return layer + 1 == layers.size() ? output : hidden;
  }
};

// Glorot-uniform weights (+/- sqrt(6/(fan_in+fan_out))), zero biases; each
// layer draws from its own substream of `rng`.
Mlp make_mlp(const std::vector<std::size_t>& dims, Activation hidden, Activation output,
             const Rng& rng);

struct ForwardCache {
  Matrix input;
  std::vector<Matrix> pre;   // pre-activation per layer
  std::vector<Matrix> post;  // post-activation per layer
};

Matrix forward(const Mlp& net, const Matrix& batch);
const Matrix& forward(const Mlp& net, const Matrix& batch, ForwardCache& cache);

struct MlpGrads {
  std::vector<Matrix> dw;
  std::vector<Vector> db;

  void accumulate(const MlpGrads& other, double scale = 1.0);
  void scale(double s);
};
MlpGrads zero_grads(const Mlp& net);

// Exact reverse-mode gradients of the forward map; returns the gradient
// w.r.t. the input batch and accumulates parameter gradients into `grads`.
Matrix backward(const Mlp& net, const ForwardCache& cache, const Matrix& out_grad,
                MlpGrads& grads);

struct GradientPenaltyResult {
  Matrix input_grads;   // per-sample gradient of the scalar output w.r.t. x
  double penalty = 0.0; // mean over batch of (||grad||_2 - 1)^2
  MlpGrads param_grads; // exact gradients of `penalty` (biases are zero a.e.)
};

// Scalar-output form; throws NonScalarOutput otherwise.
GradientPenaltyResult gradient_penalty(const Mlp& critic, const Matrix& batch);
// Multi-head form: penalises the gradient of output column `out_index`.
GradientPenaltyResult gradient_penalty_selected(const Mlp& net, const Matrix& batch,
                                                std::size_t out_index);

struct XentResult {
  double loss = 0.0;
  Matrix grad_logits;  // (softmax - onehot) / batch
};
XentResult softmax_xent(const Matrix& logits, const std::vector<int>& labels);
Matrix softmax_rows(const Matrix& logits);

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.5;
  double beta2 = 0.9;
  double eps = 1e-8;
};

struct AdamState {
  AdamConfig cfg;
  std::vector<Matrix> mw, vw;
  std::vector<Vector> mb, vb;
  std::uint64_t step = 0;
};

AdamState make_adam(const Mlp& net, AdamConfig cfg);
void adam_step(AdamState& state, Mlp& net, const MlpGrads& grads);

// FNV-1a over the parameter bytes; used to assert which nets an update touched.
std::uint64_t param_hash(const Mlp& net);

// Checkpoint format: one line of JSON (net shapes plus caller metadata),
// then "MPCK" and the f64 parameters of every net in declaration order.
void save_checkpoint(const std::filesystem::path& path, const std::string& extra_header_json,
                     std::span<const Mlp* const> nets);
// Reconstructs the nets from the header; returns the caller metadata JSON text.
std::string load_checkpoint(const std::filesystem::path& path, std::vector<Mlp>& nets);

}  // namespace mpgan
