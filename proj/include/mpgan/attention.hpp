#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "mpgan/data.hpp"
#include "mpgan/linalg.hpp"

// Discrimination-based attention: per-patch scalar weights from the ratio of
// inter-class to intra-class distances on the real seen-class features.
// Computed once, offline, before any classifier runs.

namespace mpgan {

inline constexpr double kIntraEpsilon = 1e-12;

// The inter-class distance can be measured centroid-to-centroid (the
// pseudocode reading, the default) or as the nearest other-class sample to
// the class centroid (the prose reading); kept selectable for comparison.
enum class InterClassRule { centroid_to_centroid, nearest_sample };

struct AttentionWeights {
  std::vector<std::string> patch_names;
  std::vector<int> class_ids;  // column order of the tables, sorted seen ids
  Vector weights;              // per patch: mean over classes of ratio
  Matrix intra;                // P x Y: mean sample-to-centroid distance
  Matrix inter;                // P x Y: nearest other-class centroid distance
  Matrix ratio;                // P x Y: inter / (intra + epsilon)

  std::size_t n_patches() const { return weights.size(); }
};

AttentionWeights attention_weights(const PatchFeatureBank& bank, const ClassSplit& split,
                                   const VisualPivots& pivots,
                                   InterClassRule rule = InterClassRule::centroid_to_centroid);

enum class AttentionMode { raw, uniform };
AttentionMode attention_mode_from_string(const std::string& s);
std::string to_string(AttentionMode m);

// raw returns the computed weights; uniform returns all-ones (plain voting).
Vector apply_mode(const AttentionWeights& weights, AttentionMode mode);

void save_attention(const AttentionWeights& w, const std::filesystem::path& path);
AttentionWeights load_attention(const std::filesystem::path& path);

}  // namespace mpgan
