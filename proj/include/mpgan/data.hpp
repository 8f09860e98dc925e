#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mpgan/linalg.hpp"

// Core dataset types: per-patch visual feature banks, per-class semantic
// embeddings, seen/unseen class splits, per-class visual pivots, and a
// seeded synthetic-dataset generator that makes the whole pipeline testable
// at desk scale. Everything is immutable after construction and safe to
// share across patch workers.

namespace mpgan {

enum class SplitName { scs, sce, synthetic };
std::string to_string(SplitName n);
SplitName split_name_from_string(const std::string& s);

// Seen and unseen label sets. Disjointness, uniqueness and non-emptiness
// are enforced at construction; there is no other way to build one.
class ClassSplit {
 public:
  ClassSplit(std::vector<int> seen, std::vector<int> unseen, SplitName name);

  const std::vector<int>& seen() const { return seen_; }
  const std::vector<int>& unseen() const { return unseen_; }
  SplitName name() const { return name_; }

  bool is_seen(int class_id) const;
  bool is_unseen(int class_id) const;

 private:
  std::vector<int> seen_;
  std::vector<int> unseen_;
  SplitName name_;
};

// Real per-patch visual features. Layout: features[(s * n_patches + p) * feat_dim + d].
struct PatchFeatureBank {
  std::size_t n_patches = 0;
  std::size_t feat_dim = 0;
  std::vector<std::string> patch_names;
  std::vector<int> labels;
  std::vector<double> features;

  std::size_t n_samples() const { return labels.size(); }
  const double* patch(std::size_t sample, std::size_t p) const {
    return features.data() + (sample * n_patches + p) * feat_dim;
  }
  double* patch(std::size_t sample, std::size_t p) {
    return features.data() + (sample * n_patches + p) * feat_dim;
  }

  // Every label must fall on exactly one side of the split.
  void validate_against(const ClassSplit& split) const;
};

enum class EmbeddingStage { raw_tfidf, denoised };

// One text vector per class; row i of `vectors` belongs to class_ids[i].
struct SemanticEmbedding {
  EmbeddingStage stage = EmbeddingStage::raw_tfidf;
  std::size_t dim = 0;
  std::vector<int> class_ids;
  Matrix vectors;

  std::size_t n_classes() const { return class_ids.size(); }
  std::size_t row_of(int class_id) const;
  const double* vector_of(int class_id) const;
};

// Per-(patch, seen class) feature centroids. Row p * n_classes + yi.
struct VisualPivots {
  std::size_t n_patches = 0;
  std::size_t feat_dim = 0;
  std::vector<int> class_ids;
  std::vector<std::size_t> class_counts;
  Matrix centroids;

  std::size_t n_classes() const { return class_ids.size(); }
  std::size_t index_of(int class_id) const;
  const double* pivot(std::size_t p, std::size_t class_index) const {
    return centroids.row(p * class_ids.size() + class_index);
  }
};

struct SyntheticSpec {
  std::size_t n_seen = 10;
  std::size_t n_unseen = 4;
  std::size_t n_patches = 3;
  std::size_t feat_dim = 16;
  std::size_t semantic_dim = 4;
  std::size_t samples_per_class = 50;
  std::vector<double> patch_separations;  // one entry per patch
  double noise_sigma = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SyntheticDataset {
  PatchFeatureBank bank;
  SemanticEmbedding semantics;
  ClassSplit split;
  std::vector<std::string> class_names;
};

// pivot(p, y) = mean of all class-y samples in patch p, over seen classes.
VisualPivots compute_visual_pivots(const PatchFeatureBank& bank, const ClassSplit& split);

// Per class a semantic vector is drawn once; per patch the class centroid is
// a fixed random linear image of it, rescaled so the nearest-centroid
// spacing matches patch_separations[p] and shifted non-negative; samples are
// centroid + N(0, sigma^2 I). All values are f32-quantised so banks
// round-trip the on-disk format bit-exactly.
SyntheticDataset generate_synthetic_dataset(const SyntheticSpec& spec);

void save_feature_bank(const PatchFeatureBank& bank, const std::filesystem::path& path);
PatchFeatureBank load_feature_bank(const std::filesystem::path& path);

void save_semantic_bank(const SemanticEmbedding& emb, const std::filesystem::path& path);
SemanticEmbedding load_semantic_bank(const std::filesystem::path& path,
                                     EmbeddingStage stage = EmbeddingStage::raw_tfidf);

struct DatasetManifest {
  std::vector<std::string> patch_names;
  std::vector<std::string> class_names;
  std::vector<int> seen;
  std::vector<int> unseen;
  std::string split_name = "synthetic";

  ClassSplit split() const;
};

void save_manifest(const DatasetManifest& m, const std::filesystem::path& path);
DatasetManifest load_manifest(const std::filesystem::path& path);

}  // namespace mpgan
