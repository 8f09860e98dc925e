#include "mpgan/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "mpgan/errors.hpp"
#include "mpgan/io.hpp"

namespace mpgan {

using nlohmann::json;

EvalReport top1(const std::vector<std::pair<int, int>>& predictions) {
  if (predictions.empty()) throw EmptyClass("no predictions to score");

  std::map<int, std::size_t> totals;
  std::map<int, std::size_t> correct;
  EvalReport report;
  for (const auto& [truth, pred] : predictions) {
    ++totals[truth];
    if (truth == pred) ++correct[truth];
    ++report.confusion[truth][pred];
  }

  for (const auto& [cls, n] : totals) {
    const double acc = static_cast<double>(correct[cls]) / static_cast<double>(n);
    report.per_class[cls] = acc;
    report.top1 += acc;
  }
  report.top1 /= static_cast<double>(totals.size());
  return report;
}

SynthCentroids synth_centroids_from_bank(const PatchFeatureBank& bank) {
  SynthCentroids out;
  out.n_patches = bank.n_patches;
  out.feat_dim = bank.feat_dim;

  std::map<int, std::size_t> counts;
  for (int y : bank.labels) ++counts[y];
  for (const auto& [cls, n] : counts) out.class_ids.push_back(cls);

  const std::size_t Y = out.class_ids.size();
  out.centroids = Matrix(bank.n_patches * Y, bank.feat_dim);
  std::map<int, std::size_t> index;
  for (std::size_t yi = 0; yi < Y; ++yi) index[out.class_ids[yi]] = yi;

  for (std::size_t s = 0; s < bank.n_samples(); ++s) {
    const std::size_t yi = index.at(bank.labels[s]);
    for (std::size_t p = 0; p < bank.n_patches; ++p) {
      double* row = out.centroids.row(p * Y + yi);
      const double* feat = bank.patch(s, p);
      for (std::size_t d = 0; d < bank.feat_dim; ++d) row[d] += feat[d];
    }
  }
  for (std::size_t yi = 0; yi < Y; ++yi) {
    const double inv = 1.0 / static_cast<double>(counts.at(out.class_ids[yi]));
    for (std::size_t p = 0; p < bank.n_patches; ++p) {
      double* row = out.centroids.row(p * Y + yi);
      for (std::size_t d = 0; d < bank.feat_dim; ++d) row[d] *= inv;
    }
  }
  return out;
}

RetrievalReport retrieve(const SynthCentroids& centroids, const Vector& patch_weights,
                         const PatchFeatureBank& test_bank, const std::vector<double>& fractions) {
  if (centroids.n_patches != test_bank.n_patches || centroids.feat_dim != test_bank.feat_dim)
    throw DimensionMismatch("synthesised centroids do not match the test bank");
  if (patch_weights.size() != centroids.n_patches)
    throw DimensionMismatch("one weight per patch required");
  for (double f : fractions)
    if (!(f > 0.0 && f <= 1.0))
      throw UnknownFraction("retrieval fraction must be in (0, 1], got " + std::to_string(f));

  const std::size_t n = test_bank.n_samples();
  std::map<int, std::size_t> class_counts;
  for (int y : test_bank.labels) ++class_counts[y];

  RetrievalReport report;
  report.fractions = fractions;

  std::vector<std::vector<std::size_t>> rankings(centroids.n_classes());
#pragma omp parallel for schedule(dynamic, 1)
  for (long yi = 0; yi < static_cast<long>(centroids.n_classes()); ++yi) {
    std::vector<double> scores(n, 0.0);
    for (std::size_t s = 0; s < n; ++s)
      for (std::size_t p = 0; p < centroids.n_patches; ++p)
        scores[s] += patch_weights[p] * euclidean_distance(test_bank.patch(s, p),
                                                           centroids.centroid(p, yi),
                                                           centroids.feat_dim);
    std::vector<std::size_t>& order = rankings[yi];
    order.resize(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  }

  for (double f : fractions) {
    double map_sum = 0.0;
    for (std::size_t yi = 0; yi < centroids.n_classes(); ++yi) {
      const int cls = centroids.class_ids[yi];
      auto it = class_counts.find(cls);
      if (it == class_counts.end())
        throw EmptyClass("class " + std::to_string(cls) + " has no test images");
      const std::size_t n_y = it->second;
      const std::size_t k = static_cast<std::size_t>(std::ceil(f * static_cast<double>(n_y)));

      std::size_t hits = 0;
      for (std::size_t r = 0; r < k && r < n; ++r)
        if (test_bank.labels[rankings[yi][r]] == cls) ++hits;
      const double precision = static_cast<double>(hits) / static_cast<double>(k);
      report.per_class[f][cls] = precision;
      map_sum += precision;
    }
    report.map_at[f] = map_sum / static_cast<double>(centroids.n_classes());
  }
  return report;
}

namespace {
std::string fraction_key(double f) {
  std::ostringstream os;
  os << f;
  return os.str();
}
}  // namespace

void save_eval_report(const EvalReport& r, const std::filesystem::path& path) {
  json j;
  j["top1"] = r.top1;
  json per;
  for (const auto& [cls, acc] : r.per_class) per[std::to_string(cls)] = acc;
  j["per_class"] = per;
  json conf;
  for (const auto& [truth, row] : r.confusion) {
    json jr;
    for (const auto& [pred, cnt] : row) jr[std::to_string(pred)] = cnt;
    conf[std::to_string(truth)] = jr;
  }
  j["confusion"] = conf;
  io::atomic_write_file(path, j.dump(2) + "\n");
}

void save_retrieval_report(const RetrievalReport& r, const std::filesystem::path& path) {
  json j;
  json map_j;
  for (const auto& [f, v] : r.map_at) map_j[fraction_key(f)] = v;
  j["map"] = map_j;
  json per;
  for (const auto& [f, classes] : r.per_class) {
    json jf;
    for (const auto& [cls, prec] : classes) jf[std::to_string(cls)] = prec;
    per[fraction_key(f)] = jf;
  }
  j["per_class"] = per;
  io::atomic_write_file(path, j.dump(2) + "\n");
}

}  // namespace mpgan
