#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "mpgan/data.hpp"
#include "mpgan/linalg.hpp"

// Turns pre-tokenised per-class documents into TF-IDF vectors and reduces
// them with PCA for offline denoising. The learned-projection alternative
// lives inside the GAN (see gan.hpp).

namespace mpgan {

struct Corpus {
  std::vector<int> class_ids;
  std::vector<std::vector<std::string>> documents;  // lowercase tokens per class
  std::vector<std::string> vocabulary;              // sorted unique terms

  std::size_t n_classes() const { return class_ids.size(); }
};

// Builds the vocabulary (lexicographically sorted for determinism) and
// validates that every class has at least one token.
Corpus make_corpus(std::vector<int> class_ids, std::vector<std::vector<std::string>> documents);

// {"classes": [{"id": 3, "tokens": ["small","gray",...]}, ...]}
Corpus load_corpus(const std::filesystem::path& path);

// entry(c,t) = (count(c,t) / len(c)) * (ln((1+N)/(1+df(t))) + 1), rows then
// L2-normalised. Output dim = |vocabulary|.
// When restrict_to_seen is set, the vocabulary and document frequencies are
// fit on seen-class documents only; unseen documents are vectorised against
// that vocabulary.
SemanticEmbedding tfidf(const Corpus& corpus);
SemanticEmbedding tfidf(const Corpus& corpus, const ClassSplit& split, bool restrict_to_seen);

struct PcaModel {
  Vector mean;         // input dim
  Matrix components;   // k x dim, orthonormal rows, descending eigenvalue order
  Vector eigenvalues;  // retained eigenvalues, descending

  std::size_t k() const { return components.rows; }
  std::size_t input_dim() const { return components.cols; }
};

// Exact eigendecomposition of the sample covariance (Gram-matrix form when
// dim exceeds the class count). Sign convention: the largest-magnitude entry
// of each component is positive.
PcaModel pca_fit(const SemanticEmbedding& embedding, std::size_t k);

// out = components * (x - mean) per class; stage becomes denoised.
SemanticEmbedding pca_transform(const PcaModel& model, const SemanticEmbedding& embedding);

}  // namespace mpgan
