#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "mpgan/data.hpp"
#include "mpgan/errors.hpp"
#include "mpgan/io.hpp"
#include "mpgan/rng.hpp"

using namespace mpgan;
namespace fs = std::filesystem;

namespace {

fs::path tmp_dir() {
  const fs::path dir = fs::temp_directory_path() / "mpgan_data_test";
  fs::create_directories(dir);
  return dir;
}

PatchFeatureBank tiny_bank(std::size_t n_patches, std::size_t feat_dim,
                           const std::vector<int>& labels, Rng& rng) {
  PatchFeatureBank bank;
  bank.n_patches = n_patches;
  bank.feat_dim = feat_dim;
  for (std::size_t p = 0; p < n_patches; ++p)
    bank.patch_names.push_back("patch_" + std::to_string(p));
  bank.labels = labels;
  bank.features.resize(labels.size() * n_patches * feat_dim);
  for (double& v : bank.features) v = static_cast<double>(static_cast<float>(rng.normal()));
  return bank;
}

// Independent mean: iterates patches outermost and samples in reverse.
Matrix pivot_oracle(const PatchFeatureBank& bank, const std::vector<int>& class_ids) {
  Matrix out(bank.n_patches * class_ids.size(), bank.feat_dim);
  for (std::size_t p = 0; p < bank.n_patches; ++p) {
    for (std::size_t yi = 0; yi < class_ids.size(); ++yi) {
      double* row = out.row(p * class_ids.size() + yi);
      std::size_t count = 0;
      for (std::size_t s = bank.n_samples(); s-- > 0;) {
        if (bank.labels[s] != class_ids[yi]) continue;
        ++count;
        for (std::size_t d = 0; d < bank.feat_dim; ++d) row[d] += bank.patch(s, p)[d];
      }
      for (std::size_t d = 0; d < bank.feat_dim; ++d) row[d] /= static_cast<double>(count);
    }
  }
  return out;
}

}  // namespace

TEST_CASE("pivot of two 1-d points is their midpoint") {
  PatchFeatureBank bank;
  bank.n_patches = 1;
  bank.feat_dim = 1;
  bank.patch_names = {"patch_0"};
  bank.labels = {0, 0};
  bank.features = {0.0, 2.0};
  const ClassSplit split({0}, {1}, SplitName::synthetic);
  const VisualPivots pivots = compute_visual_pivots(bank, split);
  CHECK(pivots.pivot(0, 0)[0] == doctest::Approx(1.0));
  CHECK(pivots.class_counts[0] == 2);
}

TEST_CASE("pivot of a singleton class is the sample itself") {
  Rng rng(1);
  PatchFeatureBank bank = tiny_bank(2, 3, {5}, rng);
  const ClassSplit split({5}, {9}, SplitName::synthetic);
  const VisualPivots pivots = compute_visual_pivots(bank, split);
  for (std::size_t p = 0; p < 2; ++p)
    for (std::size_t d = 0; d < 3; ++d)
      CHECK(pivots.pivot(p, 0)[d] == bank.patch(0, p)[d]);
}

TEST_CASE("pivots match an independent mean oracle to 1e-12") {
  Rng rng(42);
  std::vector<int> labels;
  for (int y = 0; y < 3; ++y)
    for (int i = 0; i < 5; ++i) labels.push_back(y);
  const PatchFeatureBank bank = tiny_bank(2, 4, labels, rng);
  const ClassSplit split({0, 1, 2}, {3}, SplitName::synthetic);
  const VisualPivots pivots = compute_visual_pivots(bank, split);
  const Matrix oracle = pivot_oracle(bank, pivots.class_ids);
  for (std::size_t i = 0; i < oracle.size(); ++i)
    CHECK(std::fabs(pivots.centroids.data[i] - oracle.data[i]) <= 1e-12);
}

TEST_CASE("missing seen class raises MissingClass") {
  Rng rng(2);
  const PatchFeatureBank bank = tiny_bank(1, 2, {0, 0}, rng);
  const ClassSplit split({0, 1}, {2}, SplitName::synthetic);
  CHECK_THROWS_AS(compute_visual_pivots(bank, split), MissingClass);
}

TEST_CASE("overlapping or empty splits cannot be constructed") {
  CHECK_THROWS_AS(ClassSplit({1, 2}, {2, 3}, SplitName::scs), InvalidSpec);
  CHECK_THROWS_AS(ClassSplit({}, {1}, SplitName::scs), InvalidSpec);
  CHECK_THROWS_AS(ClassSplit({1, 1}, {2}, SplitName::scs), InvalidSpec);
}

TEST_CASE("synthetic generation is deterministic under the seed") {
  SyntheticSpec spec;
  spec.n_seen = 3;
  spec.n_unseen = 2;
  spec.n_patches = 2;
  spec.feat_dim = 4;
  spec.semantic_dim = 3;
  spec.samples_per_class = 6;
  spec.patch_separations = {4.0, 2.0};
  spec.seed = 77;

  const SyntheticDataset a = generate_synthetic_dataset(spec);
  const SyntheticDataset b = generate_synthetic_dataset(spec);
  CHECK(a.bank.features == b.bank.features);
  CHECK(a.bank.labels == b.bank.labels);
  CHECK(a.semantics.vectors == b.semantics.vectors);

  spec.seed = 78;
  const SyntheticDataset c = generate_synthetic_dataset(spec);
  CHECK(a.bank.features != c.bank.features);
}

TEST_CASE("zero separation collapses the class centroids of that patch") {
  SyntheticSpec spec;
  spec.n_seen = 3;
  spec.n_unseen = 2;
  spec.n_patches = 2;
  spec.feat_dim = 4;
  spec.semantic_dim = 3;
  spec.samples_per_class = 200;
  spec.patch_separations = {6.0, 0.0};
  spec.noise_sigma = 0.5;
  spec.seed = 5;

  const SyntheticDataset ds = generate_synthetic_dataset(spec);
  const VisualPivots pivots = compute_visual_pivots(ds.bank, ds.split);
  // Empirical class means in the collapsed patch agree to sampling noise.
  const std::size_t Y = pivots.n_classes();
  for (std::size_t a = 0; a < Y; ++a)
    for (std::size_t b = a + 1; b < Y; ++b) {
      const double d = euclidean_distance(pivots.pivot(1, a), pivots.pivot(1, b), spec.feat_dim);
      CHECK(d < 0.5);  // ~ sigma * sqrt(2 * dim / n)
    }
  // The separated patch keeps its spacing.
  double min_sep = 1e30;
  for (std::size_t a = 0; a < Y; ++a)
    for (std::size_t b = a + 1; b < Y; ++b)
      min_sep = std::min(min_sep,
                         euclidean_distance(pivots.pivot(0, a), pivots.pivot(0, b), spec.feat_dim));
  CHECK(min_sep > 4.0);
}

TEST_CASE("invalid synthetic specs are rejected") {
  SyntheticSpec spec;
  spec.patch_separations = {1.0, 1.0, 1.0};
  spec.n_seen = 0;
  CHECK_THROWS_AS(generate_synthetic_dataset(spec), InvalidSpec);
  spec.n_seen = 2;
  spec.noise_sigma = 0.0;
  CHECK_THROWS_AS(generate_synthetic_dataset(spec), InvalidSpec);
  spec.noise_sigma = 1.0;
  spec.patch_separations = {1.0};
  CHECK_THROWS_AS(generate_synthetic_dataset(spec), InvalidSpec);
}

TEST_CASE("feature bank round-trips bit-exactly") {
  Rng rng(9);
  const PatchFeatureBank bank = tiny_bank(2, 3, {0, 4}, rng);
  const fs::path path = tmp_dir() / "roundtrip.mpfb";
  save_feature_bank(bank, path);
  const PatchFeatureBank loaded = load_feature_bank(path);
  CHECK(loaded.n_patches == bank.n_patches);
  CHECK(loaded.feat_dim == bank.feat_dim);
  CHECK(loaded.labels == bank.labels);
  CHECK(loaded.features == bank.features);
}

TEST_CASE("cub-shaped bank dimensions are accepted") {
  Rng rng(10);
  const PatchFeatureBank bank = tiny_bank(7, 512, {0, 1, 2}, rng);
  const fs::path path = tmp_dir() / "cub_shape.mpfb";
  save_feature_bank(bank, path);
  const PatchFeatureBank loaded = load_feature_bank(path);
  CHECK(loaded.n_patches == 7);
  CHECK(loaded.feat_dim == 512);
}

TEST_CASE("truncated and corrupt banks are rejected without partial state") {
  Rng rng(11);
  const PatchFeatureBank bank = tiny_bank(2, 3, {0, 1, 2}, rng);
  const fs::path path = tmp_dir() / "trunc.mpfb";
  save_feature_bank(bank, path);

  std::string bytes = io::read_file(path);
  for (const std::size_t cut : {bytes.size() - 5, std::size_t{10}, std::size_t{3}}) {
    const fs::path cut_path = tmp_dir() / "cut.mpfb";
    io::atomic_write_file(cut_path, bytes.substr(0, cut));
    CHECK_THROWS_AS(load_feature_bank(cut_path), FormatError);
  }

  std::string bad_magic = bytes;
  bad_magic[0] = 'X';
  io::atomic_write_file(tmp_dir() / "magic.mpfb", bad_magic);
  CHECK_THROWS_AS(load_feature_bank(tmp_dir() / "magic.mpfb"), FormatError);

  io::atomic_write_file(tmp_dir() / "trailing.mpfb", bytes + "xx");
  CHECK_THROWS_AS(load_feature_bank(tmp_dir() / "trailing.mpfb"), FormatError);
}

TEST_CASE("semantic bank round-trips and guards non-negativity") {
  SemanticEmbedding emb;
  emb.stage = EmbeddingStage::raw_tfidf;
  emb.dim = 2;
  emb.class_ids = {3, 8};
  emb.vectors = Matrix(2, 2);
  emb.vectors(0, 0) = 0.5;
  emb.vectors(1, 1) = 1.25;

  const fs::path path = tmp_dir() / "sem.mpse";
  save_semantic_bank(emb, path);
  const SemanticEmbedding loaded = load_semantic_bank(path);
  CHECK(loaded.class_ids == emb.class_ids);
  CHECK(loaded.vectors == emb.vectors);
  CHECK(loaded.vector_of(8)[1] == 1.25);
  CHECK_THROWS_AS(loaded.vector_of(4), MissingClass);

  emb.vectors(0, 0) = -0.5;
  save_semantic_bank(emb, path);
  CHECK_THROWS_AS(load_semantic_bank(path), FormatError);
  CHECK_NOTHROW(load_semantic_bank(path, EmbeddingStage::denoised));
}

TEST_CASE("manifest round-trips and validates the split") {
  DatasetManifest m;
  m.patch_names = {"head", "tail"};
  m.class_names = {"a", "b", "c"};
  m.seen = {0, 1};
  m.unseen = {2};
  m.split_name = "SCS";
  const fs::path path = tmp_dir() / "manifest.json";
  save_manifest(m, path);
  const DatasetManifest loaded = load_manifest(path);
  CHECK(loaded.patch_names == m.patch_names);
  CHECK(loaded.split().name() == SplitName::scs);

  io::atomic_write_file(path, "{\"patch_names\": []}");
  CHECK_THROWS_AS(load_manifest(path), FormatError);
}

TEST_CASE("bank labels must fall on one side of the split") {
  Rng rng(12);
  const PatchFeatureBank bank = tiny_bank(1, 2, {0, 7}, rng);
  const ClassSplit split({0}, {1}, SplitName::synthetic);
  CHECK_THROWS_AS(bank.validate_against(split), MissingClass);
}
