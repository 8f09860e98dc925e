#include "mpgan/attention.hpp"

#include <algorithm>
#include <limits>
#include <unordered_map>

#include <json.hpp>

#include "mpgan/errors.hpp"
#include "mpgan/io.hpp"

namespace mpgan {

using nlohmann::json;

AttentionWeights attention_weights(const PatchFeatureBank& bank, const ClassSplit& split,
                                   const VisualPivots& pivots, InterClassRule rule) {
  if (split.seen().size() < 2)
    throw NeedsTwoClasses("inter-class distance needs at least 2 seen classes");
  if (pivots.n_patches != bank.n_patches || pivots.feat_dim != bank.feat_dim)
    throw DimensionMismatch("pivots do not match the feature bank");

  const std::size_t P = bank.n_patches;
  const std::size_t Y = pivots.n_classes();
  const std::size_t D = bank.feat_dim;

  std::unordered_map<int, std::size_t> class_index;
  for (std::size_t yi = 0; yi < Y; ++yi) class_index[pivots.class_ids[yi]] = yi;

  // Seen samples grouped per class, in bank order.
  std::vector<std::vector<std::size_t>> members(Y);
  for (std::size_t s = 0; s < bank.n_samples(); ++s) {
    auto it = class_index.find(bank.labels[s]);
    if (it != class_index.end()) members[it->second].push_back(s);
  }
  for (std::size_t yi = 0; yi < Y; ++yi)
    if (members[yi].empty())
      throw MissingClass("seen class " + std::to_string(pivots.class_ids[yi]) + " has no samples");

  AttentionWeights out;
  out.patch_names = bank.patch_names;
  out.class_ids = pivots.class_ids;
  out.weights.assign(P, 0.0);
  out.intra = Matrix(P, Y);
  out.inter = Matrix(P, Y);
  out.ratio = Matrix(P, Y);

#pragma omp parallel for schedule(static)
  for (long pl = 0; pl < static_cast<long>(P); ++pl) {
    const std::size_t p = static_cast<std::size_t>(pl);
    for (std::size_t yi = 0; yi < Y; ++yi) {
      const double* centroid = pivots.pivot(p, yi);

      double intra = 0.0;
      for (std::size_t s : members[yi])
        intra += euclidean_distance(bank.patch(s, p), centroid, D);
      intra /= static_cast<double>(members[yi].size());

      double inter = std::numeric_limits<double>::infinity();
      if (rule == InterClassRule::centroid_to_centroid) {
        for (std::size_t li = 0; li < Y; ++li) {
          if (li == yi) continue;
          inter = std::min(inter, euclidean_distance(pivots.pivot(p, li), centroid, D));
        }
      } else {
        for (std::size_t li = 0; li < Y; ++li) {
          if (li == yi) continue;
          for (std::size_t s : members[li])
            inter = std::min(inter, euclidean_distance(bank.patch(s, p), centroid, D));
        }
      }

      out.intra(p, yi) = intra;
      out.inter(p, yi) = inter;
      out.ratio(p, yi) = inter / (intra + kIntraEpsilon);
    }
    double mean = 0.0;
    for (std::size_t yi = 0; yi < Y; ++yi) mean += out.ratio(p, yi);
    out.weights[p] = mean / static_cast<double>(Y);
  }
  return out;
}

AttentionMode attention_mode_from_string(const std::string& s) {
  if (s == "raw") return AttentionMode::raw;
  if (s == "uniform") return AttentionMode::uniform;
  throw ConfigError("unknown attention mode: " + s);
}

std::string to_string(AttentionMode m) {
  return m == AttentionMode::raw ? "raw" : "uniform";
}

Vector apply_mode(const AttentionWeights& weights, AttentionMode mode) {
  if (mode == AttentionMode::uniform) return Vector(weights.n_patches(), 1.0);
  return weights.weights;
}

namespace {
json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows; ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < m.cols; ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& j) {
  Matrix m(j.size(), j.empty() ? 0 : j.front().size());
  for (std::size_t i = 0; i < m.rows; ++i)
    for (std::size_t jj = 0; jj < m.cols; ++jj) m(i, jj) = j[i][jj].get<double>();
  return m;
}
}  // namespace

void save_attention(const AttentionWeights& w, const std::filesystem::path& path) {
  json j;
  j["patch_names"] = w.patch_names;
  j["class_ids"] = w.class_ids;
  j["weights"] = w.weights;
  j["intra"] = matrix_to_json(w.intra);
  j["inter"] = matrix_to_json(w.inter);
  io::atomic_write_file(path, j.dump(2) + "\n");
}

AttentionWeights load_attention(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(io::read_file(path));
  } catch (const json::exception& e) {
    throw FormatError("attention weights file is not valid JSON: " + std::string(e.what()));
  }
  AttentionWeights w;
  try {
    w.patch_names = j.at("patch_names").get<std::vector<std::string>>();
    w.class_ids = j.at("class_ids").get<std::vector<int>>();
    w.weights = j.at("weights").get<Vector>();
    w.intra = matrix_from_json(j.at("intra"));
    w.inter = matrix_from_json(j.at("inter"));
  } catch (const json::exception& e) {
    throw FormatError("attention weights file missing field: " + std::string(e.what()));
  }
  w.ratio = Matrix(w.intra.rows, w.intra.cols);
  for (std::size_t i = 0; i < w.ratio.size(); ++i)
    w.ratio.data[i] = w.inter.data[i] / (w.intra.data[i] + kIntraEpsilon);
  return w;
}

}  // namespace mpgan
