#pragma once

#include <filesystem>
#include <map>
#include <utility>
#include <vector>

#include "mpgan/data.hpp"
#include "mpgan/linalg.hpp"

// Average per-class Top-1 accuracy and zero-shot retrieval mAP. Retrieval
// scores test images per class by the attention-weighted distance to the
// synthesised class centroids and retrieves a fixed fraction of each
// class's image count.

namespace mpgan {

struct EvalReport {
  double top1 = 0.0;
  std::map<int, double> per_class;              // class id -> accuracy
  std::map<int, std::map<int, int>> confusion;  // true -> predicted -> count
};

// pairs are (true class, predicted class); Top-1 is the unweighted mean of
// per-class accuracies.
EvalReport top1(const std::vector<std::pair<int, int>>& predictions);

// Mean synthesised feature per (patch, class); same row layout as pivots.
struct SynthCentroids {
  std::size_t n_patches = 0;
  std::size_t feat_dim = 0;
  std::vector<int> class_ids;
  Matrix centroids;

  std::size_t n_classes() const { return class_ids.size(); }
  const double* centroid(std::size_t p, std::size_t class_index) const {
    return centroids.row(p * class_ids.size() + class_index);
  }
};

SynthCentroids synth_centroids_from_bank(const PatchFeatureBank& synth_bank);

struct RetrievalReport {
  std::vector<double> fractions;
  std::map<double, double> map_at;                     // fraction -> mAP
  std::map<double, std::map<int, double>> per_class;  // fraction -> class -> precision
};

// score(image, y) = sum_p weights[p] * ||x_p - centroid_{p,y}||_2; per class
// the k = ceil(fraction * n_y) lowest-scoring images are retrieved.
RetrievalReport retrieve(const SynthCentroids& centroids, const Vector& patch_weights,
                         const PatchFeatureBank& test_bank, const std::vector<double>& fractions);

void save_eval_report(const EvalReport& r, const std::filesystem::path& path);
void save_retrieval_report(const RetrievalReport& r, const std::filesystem::path& path);

}  // namespace mpgan
