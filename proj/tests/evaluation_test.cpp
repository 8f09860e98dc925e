#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mpgan/errors.hpp"
#include "mpgan/evaluation.hpp"
#include "mpgan/rng.hpp"

using namespace mpgan;

namespace {

PatchFeatureBank clustered_bank(std::size_t P, std::size_t D, const std::vector<int>& classes,
                                std::size_t per_class, double spacing, double sigma, Rng& rng) {
  PatchFeatureBank bank;
  bank.n_patches = P;
  bank.feat_dim = D;
  for (std::size_t p = 0; p < P; ++p) bank.patch_names.push_back("patch_" + std::to_string(p));
  for (int cls : classes)
    for (std::size_t i = 0; i < per_class; ++i) {
      bank.labels.push_back(cls);
      for (std::size_t p = 0; p < P; ++p)
        for (std::size_t d = 0; d < D; ++d)
          bank.features.push_back(spacing * cls + sigma * rng.normal());
    }
  return bank;
}

}  // namespace

TEST_CASE("all-correct predictions score 1.0") {
  const EvalReport r = top1({{0, 0}, {1, 1}, {1, 1}});
  CHECK(r.top1 == doctest::Approx(1.0));
  CHECK(r.per_class.at(0) == doctest::Approx(1.0));
}

TEST_CASE("per-class averaging beats micro-averaging") {
  // class 0: 2/3 correct, class 1: 1/1 -> (2/3 + 1)/2
  const EvalReport r = top1({{0, 0}, {0, 0}, {0, 1}, {1, 1}});
  CHECK(r.top1 == doctest::Approx((2.0 / 3.0 + 1.0) / 2.0));
  CHECK(r.per_class.at(0) == doctest::Approx(2.0 / 3.0));
  CHECK(r.confusion.at(0).at(1) == 1);
}

TEST_CASE("duplicating one class's samples leaves top1 unchanged") {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::pair<int, int>> preds;
    for (int cls = 0; cls < 4; ++cls) {
      const std::size_t n = 1 + rng.uniform_index(6);
      for (std::size_t i = 0; i < n; ++i)
        preds.push_back({cls, static_cast<int>(rng.uniform_index(4))});
    }
    const double base = top1(preds).top1;

    std::vector<std::pair<int, int>> doubled = preds;
    for (const auto& pr : preds)
      if (pr.first == 2) doubled.push_back(pr);
    CHECK(top1(doubled).top1 == doctest::Approx(base).epsilon(1e-12));
  }
}

TEST_CASE("top1 is permutation invariant") {
  std::vector<std::pair<int, int>> preds{{0, 1}, {0, 0}, {1, 1}, {2, 0}, {2, 2}};
  const double base = top1(preds).top1;
  std::reverse(preds.begin(), preds.end());
  CHECK(top1(preds).top1 == doctest::Approx(base).epsilon(1e-15));
  CHECK_THROWS_AS(top1({}), EmptyClass);
}

TEST_CASE("hand-computed retrieval precision") {
  // 1-D, one patch. Class 0 has 4 images at {0,1,2,10}; class 1 has 2 at {4,5}.
  // Centroid of class 0 at 0: ranking 0,1,2,4,5,10. fraction 0.5 -> k=2, both
  // class 0 -> precision 1. Centroid of class 1 at 4.5: ranking 4,5,... k=1.
  PatchFeatureBank bank;
  bank.n_patches = 1;
  bank.feat_dim = 1;
  bank.patch_names = {"p"};
  bank.labels = {0, 0, 0, 0, 1, 1};
  bank.features = {0, 1, 2, 10, 4, 5};

  SynthCentroids cents;
  cents.n_patches = 1;
  cents.feat_dim = 1;
  cents.class_ids = {0, 1};
  cents.centroids = Matrix(2, 1);
  cents.centroids(0, 0) = 0.0;
  cents.centroids(1, 0) = 4.5;

  const RetrievalReport r = retrieve(cents, {1.0}, bank, {0.5});
  CHECK(r.per_class.at(0.5).at(0) == doctest::Approx(1.0));
  CHECK(r.per_class.at(0.5).at(1) == doctest::Approx(1.0));

  // Pull class 0's centroid near the class-1 images: k=2 of ranking 4,5 ->
  // zero hits for class 0.
  cents.centroids(0, 0) = 4.4;
  const RetrievalReport miss = retrieve(cents, {1.0}, bank, {0.5});
  CHECK(miss.per_class.at(0.5).at(0) == doctest::Approx(0.0));
  CHECK(miss.map_at.at(0.5) == doctest::Approx(0.5));
}

TEST_CASE("well separated clusters retrieve perfectly at every fraction") {
  Rng rng(14);
  const std::vector<int> classes{0, 1, 2};
  const PatchFeatureBank bank = clustered_bank(2, 4, classes, 6, 50.0, 0.1, rng);
  const SynthCentroids cents = synth_centroids_from_bank(bank);
  const RetrievalReport r = retrieve(cents, {1.0, 1.0}, bank, {0.25, 0.5, 1.0});
  for (double f : {0.25, 0.5, 1.0}) CHECK(r.map_at.at(f) == doctest::Approx(1.0));
}

TEST_CASE("ranking is invariant to rescaling the patch weights") {
  Rng rng(15);
  const std::vector<int> classes{0, 1};
  const PatchFeatureBank bank = clustered_bank(3, 2, classes, 5, 3.0, 1.5, rng);
  const SynthCentroids cents = synth_centroids_from_bank(bank);
  const Vector w{0.5, 2.0, 1.0};
  Vector scaled = w;
  for (double& v : scaled) v *= 123.0;
  const RetrievalReport a = retrieve(cents, w, bank, {0.25, 1.0});
  const RetrievalReport b = retrieve(cents, scaled, bank, {0.25, 1.0});
  for (double f : {0.25, 1.0}) CHECK(a.map_at.at(f) == doctest::Approx(b.map_at.at(f)).epsilon(1e-12));
}

TEST_CASE("saturated top fraction keeps precision monotone") {
  // Over random rankings: whenever the top-25% retrieved are all hits,
  // precision at 100% cannot exceed precision at 25%.
  Rng rng(16);
  int checked = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n_y = 4 + rng.uniform_index(8);
    const std::size_t total = n_y + 10;
    std::vector<int> labels(total, 1);
    for (std::size_t i = 0; i < n_y; ++i) labels[i] = 0;
    for (std::size_t i = total; i > 1; --i) std::swap(labels[i - 1], labels[rng.uniform_index(i)]);

    const std::size_t k25 = static_cast<std::size_t>(std::ceil(0.25 * n_y));
    std::size_t hits25 = 0, hits100 = 0;
    for (std::size_t i = 0; i < k25; ++i) hits25 += labels[i] == 0;
    for (std::size_t i = 0; i < n_y; ++i) hits100 += labels[i] == 0;
    if (hits25 == k25) {
      ++checked;
      CHECK(static_cast<double>(hits100) / n_y <= static_cast<double>(hits25) / k25 + 1e-12);
    }
  }
  CHECK(checked > 20);
}

TEST_CASE("bad fractions and empty classes are rejected") {
  Rng rng(17);
  const PatchFeatureBank bank = clustered_bank(1, 2, {0, 1}, 3, 5.0, 0.5, rng);
  const SynthCentroids cents = synth_centroids_from_bank(bank);
  CHECK_THROWS_AS(retrieve(cents, {1.0}, bank, {0.0}), UnknownFraction);
  CHECK_THROWS_AS(retrieve(cents, {1.0}, bank, {1.5}), UnknownFraction);

  SynthCentroids extra = cents;
  extra.class_ids = {0, 7};  // class 7 has no test images
  CHECK_THROWS_AS(retrieve(extra, {1.0}, bank, {0.5}), EmptyClass);
}
