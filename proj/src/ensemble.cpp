#include "mpgan/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "mpgan/errors.hpp"

namespace mpgan {

Mlp train_softmax_classifier(const Matrix& features, const std::vector<int>& labels,
                             std::size_t n_classes, const ClassifierConfig& cfg, const Rng& rng) {
  if (features.rows != labels.size())
    throw DimensionMismatch("classifier needs one label per feature row");
  if (n_classes < 1) throw DimensionMismatch("classifier needs at least one class");

  std::vector<std::size_t> per_class(n_classes, 0);
  for (int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= n_classes)
      throw LabelOutOfRange("classifier label " + std::to_string(y));
    ++per_class[static_cast<std::size_t>(y)];
  }
  for (std::size_t y = 0; y < n_classes; ++y)
    if (per_class[y] == 0)
      throw MissingClassSamples("class index " + std::to_string(y) + " has no training samples");

  Mlp net = make_mlp({features.cols, n_classes}, Activation::leaky_relu, Activation::identity,
                     rng.substream("init"));
  AdamState opt = make_adam(net, AdamConfig{.lr = cfg.lr});

  const std::size_t n = features.rows;
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng shuffle_rng = rng.substream("shuffle");

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t i = n; i > 1; --i)
      std::swap(order[i - 1], order[shuffle_rng.uniform_index(i)]);

    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::size_t stop = std::min(start + cfg.batch_size, n);
      Matrix batch(stop - start, features.cols);
      std::vector<int> batch_labels(stop - start);
      for (std::size_t i = start; i < stop; ++i) {
        const double* src = features.row(order[i]);
        std::copy(src, src + features.cols, batch.row(i - start));
        batch_labels[i - start] = labels[order[i]];
      }

      ForwardCache cache;
      const Matrix& logits = forward(net, batch, cache);
      const XentResult xent = softmax_xent(logits, batch_labels);
      if (!std::isfinite(xent.loss)) throw NonFiniteLoss("classifier training diverged");
      MlpGrads grads = zero_grads(net);
      backward(net, cache, xent.grad_logits, grads);
      adam_step(opt, net, grads);
    }
  }
  return net;
}

std::vector<Mlp> train_classifiers(const std::vector<Matrix>& per_patch_features,
                                   const std::vector<int>& labels, std::size_t n_classes,
                                   const ClassifierConfig& cfg, const Rng& rng) {
  std::vector<Mlp> out(per_patch_features.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (long p = 0; p < static_cast<long>(per_patch_features.size()); ++p)
    out[p] = train_softmax_classifier(per_patch_features[p], labels, n_classes, cfg,
                                      rng.substream("classifier").substream(p));
  return out;
}

Vector patch_probabilities(const Mlp& classifier, const double* x, std::size_t dim) {
  if (dim != classifier.input_dim())
    throw DimensionMismatch("patch feature dim does not match the classifier");
  Matrix batch(1, dim);
  std::copy(x, x + dim, batch.row(0));
  const Matrix probs = softmax_rows(forward(classifier, batch));
  return Vector(probs.row(0), probs.row(0) + probs.cols);
}

std::size_t single_patch_predict(const Vector& probs) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < probs.size(); ++i)
    if (probs[i] > probs[best]) best = i;
  return best;
}

EnsemblePrediction fuse_probabilities(const std::vector<Vector>& per_patch_probs,
                                      const Vector& patch_weights) {
  if (per_patch_probs.size() != patch_weights.size())
    throw PatchCountMismatch("one weight per patch distribution required");
  if (per_patch_probs.empty()) throw PatchCountMismatch("no patch distributions to fuse");

  EnsemblePrediction pred;
  pred.fused.assign(per_patch_probs.front().size(), 0.0);
  for (std::size_t p = 0; p < per_patch_probs.size(); ++p) {
    if (per_patch_probs[p].size() != pred.fused.size())
      throw DimensionMismatch("patch distributions disagree on class count");
    for (std::size_t y = 0; y < pred.fused.size(); ++y)
      pred.fused[y] += patch_weights[p] * per_patch_probs[p][y];
  }
  pred.class_index = single_patch_predict(pred.fused);
  return pred;
}

EnsemblePrediction ensemble_predict(const EnsembleModel& model,
                                    const std::vector<const double*>& patches,
                                    std::size_t feat_dim) {
  if (patches.size() != model.n_patches())
    throw PatchCountMismatch("sample has " + std::to_string(patches.size()) + " patches, model has " +
                             std::to_string(model.n_patches()));
  std::vector<Vector> probs(patches.size());
  for (std::size_t p = 0; p < patches.size(); ++p)
    probs[p] = patch_probabilities(model.classifiers[p], patches[p], feat_dim);
  return fuse_probabilities(probs, model.patch_weights);
}

}  // namespace mpgan
