#pragma once

#include <cstdint>
#include <vector>

#include "mpgan/linalg.hpp"
#include "mpgan/nets.hpp"
#include "mpgan/rng.hpp"

// One softmax classifier per patch, trained on synthesised unseen-class
// features, fused by attention-weighted soft voting: M = sum_p A_p * V_p,
// prediction = argmax M (ties broken toward the lowest class index).

namespace mpgan {

struct ClassifierConfig {
  std::size_t epochs = 50;
  double lr = 1e-2;
  std::size_t batch_size = 128;
};

// Single linear layer + softmax, minimised with Adam over shuffled
// minibatches for a fixed epoch budget. labels are class indices in [0, Y).
Mlp train_softmax_classifier(const Matrix& features, const std::vector<int>& labels,
                             std::size_t n_classes, const ClassifierConfig& cfg, const Rng& rng);

// One classifier per patch; per_patch_features[p] holds the synthesised
// features for patch p, all patches sharing `labels`. Every class must have
// at least one sample.
std::vector<Mlp> train_classifiers(const std::vector<Matrix>& per_patch_features,
                                   const std::vector<int>& labels, std::size_t n_classes,
                                   const ClassifierConfig& cfg, const Rng& rng);

// V_p: softmax distribution over the unseen classes for one patch feature.
Vector patch_probabilities(const Mlp& classifier, const double* x, std::size_t dim);

// argmax with lowest-index tie-break.
std::size_t single_patch_predict(const Vector& probs);

struct EnsembleModel {
  std::vector<Mlp> classifiers;  // one per patch
  Vector patch_weights;          // attention weights, already mode-applied
  std::vector<int> unseen_labels;

  std::size_t n_patches() const { return classifiers.size(); }
};

struct EnsemblePrediction {
  std::size_t class_index = 0;  // position in unseen_labels
  Vector fused;                 // M = sum_p A_p * V_p
};

// Fuses already-computed per-patch distributions (Eq. 5-7 algebra only).
EnsemblePrediction fuse_probabilities(const std::vector<Vector>& per_patch_probs,
                                      const Vector& patch_weights);

// patches[p] points at the p-th patch feature vector of one sample.
EnsemblePrediction ensemble_predict(const EnsembleModel& model,
                                    const std::vector<const double*>& patches,
                                    std::size_t feat_dim);

}  // namespace mpgan
