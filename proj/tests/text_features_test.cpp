#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "mpgan/errors.hpp"
#include "mpgan/linalg.hpp"
#include "mpgan/rng.hpp"
#include "mpgan/text.hpp"

using namespace mpgan;

namespace {

SemanticEmbedding random_embedding(std::size_t n, std::size_t dim, std::uint64_t seed) {
  Rng rng(seed);
  SemanticEmbedding emb;
  emb.stage = EmbeddingStage::raw_tfidf;
  emb.dim = dim;
  emb.vectors = Matrix(n, dim);
  for (std::size_t c = 0; c < n; ++c) emb.class_ids.push_back(static_cast<int>(c));
  for (double& v : emb.vectors.data) v = rng.uniform01();
  return emb;
}

// Classical Jacobi: rotate away the largest off-diagonal element each step.
// Deliberately a different strategy from the library's cyclic sweeps.
std::vector<double> oracle_eigenvalues(Matrix a) {
  const std::size_t n = a.rows;
  for (int iter = 0; iter < 10000; ++iter) {
    std::size_t p = 0, q = 1;
    double biggest = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (std::fabs(a(i, j)) > biggest) {
          biggest = std::fabs(a(i, j));
          p = i;
          q = j;
        }
    if (biggest < 1e-14) break;

    const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
    const double t =
        (theta >= 0 ? 1.0 : -1.0) / (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
    const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
    for (std::size_t k = 0; k < n; ++k) {
      const double akp = a(k, p), akq = a(k, q);
      a(k, p) = c * akp - s * akq;
      a(k, q) = s * akp + c * akq;
    }
    for (std::size_t k = 0; k < n; ++k) {
      const double apk = a(p, k), aqk = a(q, k);
      a(p, k) = c * apk - s * aqk;
      a(q, k) = s * apk + c * aqk;
    }
  }
  std::vector<double> eig(n);
  for (std::size_t i = 0; i < n; ++i) eig[i] = a(i, i);
  std::sort(eig.rbegin(), eig.rend());
  return eig;
}

Matrix sample_covariance(const Matrix& data) {
  Vector mean(data.cols, 0.0);
  for (std::size_t i = 0; i < data.rows; ++i)
    for (std::size_t j = 0; j < data.cols; ++j) mean[j] += data(i, j);
  for (double& m : mean) m /= static_cast<double>(data.rows);
  Matrix cov(data.cols, data.cols);
  for (std::size_t i = 0; i < data.rows; ++i)
    for (std::size_t a = 0; a < data.cols; ++a)
      for (std::size_t b = 0; b < data.cols; ++b)
        cov(a, b) += (data(i, a) - mean[a]) * (data(i, b) - mean[b]);
  scale_inplace(cov, 1.0 / static_cast<double>(data.rows - 1));
  return cov;
}

}  // namespace

TEST_CASE("single class, single term normalises to [1]") {
  const Corpus corpus = make_corpus({0}, {{"a", "a"}});
  const SemanticEmbedding emb = tfidf(corpus);
  REQUIRE(emb.dim == 1);
  CHECK(emb.vectors(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("two-document hand example") {
  const Corpus corpus = make_corpus({0, 1}, {{"a", "b"}, {"a"}});
  const SemanticEmbedding emb = tfidf(corpus);
  REQUIRE(emb.dim == 2);
  // vocabulary sorted: a, b. df(a)=2 -> idf=ln(3/3)+1=1; df(b)=1 -> idf=ln(3/2)+1.
  const double idf_b = std::log(1.5) + 1.0;
  CHECK(idf_b == doctest::Approx(1.4055).epsilon(1e-4));
  const double pre_a = 0.5 * 1.0, pre_b = 0.5 * idf_b;
  const double norm = std::sqrt(pre_a * pre_a + pre_b * pre_b);
  CHECK(emb.vectors(0, 0) == doctest::Approx(pre_a / norm).epsilon(1e-12));
  CHECK(emb.vectors(0, 1) == doctest::Approx(pre_b / norm).epsilon(1e-12));
  // Frozen to 4 d.p.: [0.5797, 0.8148].
  CHECK(std::fabs(emb.vectors(0, 0) - 0.5797) < 1e-4);
  CHECK(std::fabs(emb.vectors(0, 1) - 0.8148) < 1e-4);
  // Second document has only "a".
  CHECK(emb.vectors(1, 0) == doctest::Approx(1.0));
  CHECK(emb.vectors(1, 1) == doctest::Approx(0.0));
}

TEST_CASE("vocabulary size fixes the embedding dim") {
  std::vector<std::vector<std::string>> docs(3);
  for (int t = 0; t < 7551; ++t) docs[t % 3].push_back("term" + std::to_string(t));
  const Corpus corpus = make_corpus({0, 1, 2}, docs);
  CHECK(tfidf(corpus).dim == 7551);
}

TEST_CASE("tfidf rows are non-negative unit vectors, bit-deterministic") {
  Rng rng(4);
  std::vector<std::vector<std::string>> docs(5);
  std::vector<int> ids;
  for (int c = 0; c < 5; ++c) {
    ids.push_back(c);
    const std::size_t len = 3 + rng.uniform_index(20);
    for (std::size_t i = 0; i < len; ++i)
      docs[c].push_back("w" + std::to_string(rng.uniform_index(30)));
  }
  const SemanticEmbedding a = tfidf(make_corpus(ids, docs));
  const SemanticEmbedding b = tfidf(make_corpus(ids, docs));
  CHECK(a.vectors == b.vectors);
  for (std::size_t c = 0; c < a.n_classes(); ++c) {
    const double* row = a.vectors.row(c);
    double norm = 0.0;
    for (std::size_t t = 0; t < a.dim; ++t) {
      CHECK(row[t] >= 0.0);
      norm += row[t] * row[t];
    }
    CHECK(std::sqrt(norm) == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("empty documents are rejected") {
  CHECK_THROWS_AS(make_corpus({0, 1}, {{"a"}, {}}), EmptyDocument);
  CHECK_THROWS_AS(make_corpus({}, {}), EmptyDocument);
}

TEST_CASE("seen-only fitting drops unseen-only vocabulary") {
  const Corpus corpus = make_corpus({0, 1}, {{"common", "seen"}, {"common", "rare"}});
  const ClassSplit split({0}, {1}, SplitName::synthetic);
  const SemanticEmbedding restricted = tfidf(corpus, split, true);
  CHECK(restricted.dim == 2);  // "common", "seen"
  const SemanticEmbedding full = tfidf(corpus, split, false);
  CHECK(full.dim == 3);
}

TEST_CASE("pca rank bound: k = n_classes succeeds, k = n_classes + 1 fails") {
  const SemanticEmbedding emb = random_embedding(200, 7551, 13);
  CHECK_THROWS_AS(pca_fit(emb, 201), RankError);
  const PcaModel model = pca_fit(emb, 200);
  REQUIRE(model.k() == 200);
  // rows pairwise orthonormal to 1e-8
  for (std::size_t i = 0; i < model.k(); ++i) {
    CHECK(l2_norm(model.components.row(i), model.input_dim()) == doctest::Approx(1.0).epsilon(1e-8));
    for (std::size_t j = i + 1; j < model.k(); ++j)
      CHECK(std::fabs(dot(model.components.row(i), model.components.row(j), model.input_dim())) <
            1e-8);
  }
}

TEST_CASE("data already in a k-dim subspace reconstructs exactly") {
  const std::size_t dim = 6, k = 3, n = 10;
  Rng rng(21);
  Matrix basis(k, dim);
  basis(0, 0) = 1.0;
  basis(1, 2) = 1.0;
  basis(2, 4) = 1.0;
  SemanticEmbedding emb;
  emb.dim = dim;
  emb.vectors = Matrix(n, dim);
  for (std::size_t i = 0; i < n; ++i) {
    emb.class_ids.push_back(static_cast<int>(i));
    for (std::size_t b = 0; b < k; ++b) {
      const double coeff = rng.normal();
      for (std::size_t d = 0; d < dim; ++d) emb.vectors(i, d) += coeff * basis(b, d);
    }
  }
  const PcaModel model = pca_fit(emb, k);
  const SemanticEmbedding proj = pca_transform(model, emb);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t d = 0; d < dim; ++d) {
      double recon = model.mean[d];
      for (std::size_t b = 0; b < k; ++b) recon += proj.vectors(i, b) * model.components(b, d);
      CHECK(recon == doctest::Approx(emb.vectors(i, d)).epsilon(1e-8));
    }
}

TEST_CASE("reconstruction error equals the discarded eigenvalue mass") {
  const SemanticEmbedding emb = random_embedding(10, 6, 33);
  const std::size_t k = 3;
  const PcaModel model = pca_fit(emb, k);
  const SemanticEmbedding proj = pca_transform(model, emb);

  double err = 0.0;
  for (std::size_t i = 0; i < emb.n_classes(); ++i)
    for (std::size_t d = 0; d < emb.dim; ++d) {
      double recon = model.mean[d];
      for (std::size_t b = 0; b < k; ++b) recon += proj.vectors(i, b) * model.components(b, d);
      const double diff = emb.vectors(i, d) - recon;
      err += diff * diff;
    }

  const std::vector<double> eig = oracle_eigenvalues(sample_covariance(emb.vectors));
  double discarded = 0.0;
  for (std::size_t i = k; i < eig.size(); ++i) discarded += eig[i];
  CHECK(err == doctest::Approx(discarded * (10 - 1)).epsilon(1e-8));

  // Retained eigenvalues agree with the oracle too.
  for (std::size_t i = 0; i < k; ++i)
    CHECK(model.eigenvalues[i] == doctest::Approx(eig[i]).epsilon(1e-8));
}

TEST_CASE("transformed training data is decorrelated") {
  const SemanticEmbedding emb = random_embedding(12, 5, 44);
  const PcaModel model = pca_fit(emb, 4);
  const SemanticEmbedding proj = pca_transform(model, emb);
  const Matrix cov = sample_covariance(proj.vectors);
  for (std::size_t i = 0; i < cov.rows; ++i)
    for (std::size_t j = 0; j < cov.cols; ++j)
      if (i != j) CHECK(std::fabs(cov(i, j)) < 1e-8);
}

TEST_CASE("transforming the mean gives zero") {
  const SemanticEmbedding emb = random_embedding(8, 4, 55);
  const PcaModel model = pca_fit(emb, 3);
  SemanticEmbedding mean_only;
  mean_only.dim = emb.dim;
  mean_only.class_ids = {0};
  mean_only.vectors = Matrix(1, emb.dim);
  for (std::size_t d = 0; d < emb.dim; ++d) mean_only.vectors(0, d) = model.mean[d];
  const SemanticEmbedding proj = pca_transform(model, mean_only);
  for (std::size_t b = 0; b < model.k(); ++b)
    CHECK(std::fabs(proj.vectors(0, b)) < 1e-12);
}

TEST_CASE("full-rank k = dim preserves pairwise distances") {
  const SemanticEmbedding emb = random_embedding(9, 4, 66);
  const PcaModel model = pca_fit(emb, 4);
  const SemanticEmbedding proj = pca_transform(model, emb);
  for (std::size_t a = 0; a < emb.n_classes(); ++a)
    for (std::size_t b = a + 1; b < emb.n_classes(); ++b) {
      const double before = euclidean_distance(emb.vectors.row(a), emb.vectors.row(b), emb.dim);
      const double after = euclidean_distance(proj.vectors.row(a), proj.vectors.row(b), proj.dim);
      CHECK(after == doctest::Approx(before).epsilon(1e-8));
    }
}

TEST_CASE("projection never expands distances") {
  const SemanticEmbedding emb = random_embedding(15, 7, 77);
  const PcaModel model = pca_fit(emb, 3);
  const SemanticEmbedding proj = pca_transform(model, emb);
  for (std::size_t a = 0; a < emb.n_classes(); ++a)
    for (std::size_t b = a + 1; b < emb.n_classes(); ++b) {
      const double before = euclidean_distance(emb.vectors.row(a), emb.vectors.row(b), emb.dim);
      const double after = euclidean_distance(proj.vectors.row(a), proj.vectors.row(b), proj.dim);
      CHECK(after <= before + 1e-9);
    }
}

TEST_CASE("component sign convention pins the largest entry positive") {
  const SemanticEmbedding emb = random_embedding(10, 6, 88);
  const PcaModel model = pca_fit(emb, 4);
  for (std::size_t r = 0; r < model.k(); ++r) {
    const double* row = model.components.row(r);
    double best = 0.0;
    for (std::size_t d = 0; d < model.input_dim(); ++d)
      if (std::fabs(row[d]) > std::fabs(best)) best = row[d];
    CHECK(best > 0.0);
  }
}

TEST_CASE("transform rejects mismatched dims") {
  const SemanticEmbedding emb = random_embedding(8, 5, 99);
  const PcaModel model = pca_fit(emb, 2);
  const SemanticEmbedding other = random_embedding(3, 4, 100);
  CHECK_THROWS_AS(pca_transform(model, other), DimensionMismatch);
}
