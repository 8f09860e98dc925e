#include "mpgan/text.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <json.hpp>

#include "mpgan/errors.hpp"
#include "mpgan/io.hpp"

namespace mpgan {

using nlohmann::json;

Corpus make_corpus(std::vector<int> class_ids, std::vector<std::vector<std::string>> documents) {
  if (class_ids.size() != documents.size())
    throw DimensionMismatch("corpus needs one document per class id");
  if (class_ids.empty()) throw EmptyDocument("corpus has no classes");
  std::set<int> ids(class_ids.begin(), class_ids.end());
  if (ids.size() != class_ids.size()) throw InvalidSpec("duplicate class ids in corpus");

  std::set<std::string> vocab;
  for (std::size_t c = 0; c < documents.size(); ++c) {
    if (documents[c].empty())
      throw EmptyDocument("class " + std::to_string(class_ids[c]) + " has no tokens");
    vocab.insert(documents[c].begin(), documents[c].end());
  }

  Corpus corpus;
  corpus.class_ids = std::move(class_ids);
  corpus.documents = std::move(documents);
  corpus.vocabulary.assign(vocab.begin(), vocab.end());  // std::set iterates sorted
  return corpus;
}

Corpus load_corpus(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(io::read_file(path));
  } catch (const json::exception& e) {
    throw FormatError("corpus is not valid JSON: " + std::string(e.what()));
  }
  std::vector<int> ids;
  std::vector<std::vector<std::string>> docs;
  try {
    for (const auto& cls : j.at("classes")) {
      ids.push_back(cls.at("id").get<int>());
      docs.push_back(cls.at("tokens").get<std::vector<std::string>>());
    }
  } catch (const json::exception& e) {
    throw FormatError("corpus missing required field: " + std::string(e.what()));
  }
  return make_corpus(std::move(ids), std::move(docs));
}

namespace {

SemanticEmbedding tfidf_impl(const Corpus& corpus, const std::vector<std::size_t>& fit_rows) {
  // Vocabulary and document frequencies come from the fit rows only.
  std::map<std::string, std::size_t> term_index;
  {
    std::set<std::string> vocab;
    for (std::size_t c : fit_rows) vocab.insert(corpus.documents[c].begin(), corpus.documents[c].end());
    std::size_t i = 0;
    for (const auto& t : vocab) term_index[t] = i++;
  }
  const std::size_t dim = term_index.size();
  const std::size_t n_docs = fit_rows.size();

  std::vector<std::size_t> df(dim, 0);
  for (std::size_t c : fit_rows) {
    std::set<std::string> uniq(corpus.documents[c].begin(), corpus.documents[c].end());
    for (const auto& t : uniq) ++df[term_index.at(t)];
  }
  Vector idf(dim);
  for (std::size_t t = 0; t < dim; ++t)
    idf[t] = std::log((1.0 + static_cast<double>(n_docs)) / (1.0 + static_cast<double>(df[t]))) + 1.0;

  SemanticEmbedding emb;
  emb.stage = EmbeddingStage::raw_tfidf;
  emb.dim = dim;
  emb.class_ids = corpus.class_ids;
  emb.vectors = Matrix(corpus.n_classes(), dim);

  for (std::size_t c = 0; c < corpus.n_classes(); ++c) {
    const auto& doc = corpus.documents[c];
    if (doc.empty()) throw EmptyDocument("class " + std::to_string(corpus.class_ids[c]) + " has no tokens");
    double* row = emb.vectors.row(c);
    const double inv_len = 1.0 / static_cast<double>(doc.size());
    for (const auto& tok : doc) {
      auto it = term_index.find(tok);
      if (it != term_index.end()) row[it->second] += inv_len;  // out-of-vocabulary tokens drop out
    }
    for (std::size_t t = 0; t < dim; ++t) row[t] *= idf[t];
    const double norm = l2_norm(row, dim);
    if (norm > 0.0)
      for (std::size_t t = 0; t < dim; ++t) row[t] /= norm;
  }
  return emb;
}

}  // namespace

SemanticEmbedding tfidf(const Corpus& corpus) {
  if (corpus.n_classes() == 0) throw EmptyDocument("corpus has no classes");
  std::vector<std::size_t> all(corpus.n_classes());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return tfidf_impl(corpus, all);
}

SemanticEmbedding tfidf(const Corpus& corpus, const ClassSplit& split, bool restrict_to_seen) {
  if (!restrict_to_seen) return tfidf(corpus);
  std::vector<std::size_t> rows;
  for (std::size_t c = 0; c < corpus.n_classes(); ++c)
    if (split.is_seen(corpus.class_ids[c])) rows.push_back(c);
  if (rows.empty()) throw EmptyDocument("no seen-class documents to fit tf-idf on");
  return tfidf_impl(corpus, rows);
}

namespace {

// Cyclic Jacobi on a symmetric matrix; returns eigenvalues (diagonal) and
// accumulates rotations into `vecs` (columns are eigenvectors).
void jacobi_eigen(Matrix& a, Matrix& vecs) {
  const std::size_t n = a.rows;
  vecs = Matrix(n, n);
  for (std::size_t i = 0; i < n; ++i) vecs(i, i) = 1.0;
  if (n < 2) return;

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (off < 1e-30) break;

    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::abs(apq) < 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

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
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = vecs(k, p), vkq = vecs(k, q);
          vecs(k, p) = c * vkp - s * vkq;
          vecs(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
}

void fix_sign(double* row, std::size_t n) {
  std::size_t arg = 0;
  double best = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double m = std::abs(row[i]);
    if (m > best) {
      best = m;
      arg = i;
    }
  }
  if (row[arg] < 0.0)
    for (std::size_t i = 0; i < n; ++i) row[i] = -row[i];
}

// Deterministically extends `components` (rows 0..filled-1, orthonormal)
// with unit rows orthogonal to all previous ones.
void complete_basis(Matrix& components, std::size_t filled) {
  const std::size_t dim = components.cols;
  for (std::size_t r = filled; r < components.rows; ++r) {
    bool ok = false;
    for (std::size_t e = 0; e < dim && !ok; ++e) {
      Vector cand(dim, 0.0);
      cand[e] = 1.0;
      for (std::size_t prev = 0; prev < r; ++prev) {
        const double* p = components.row(prev);
        const double d = dot(cand.data(), p, dim);
        for (std::size_t i = 0; i < dim; ++i) cand[i] -= d * p[i];
      }
      const double norm = l2_norm(cand.data(), dim);
      if (norm > 0.5) {
        double* row = components.row(r);
        for (std::size_t i = 0; i < dim; ++i) row[i] = cand[i] / norm;
        fix_sign(row, dim);
        ok = true;
      }
    }
    if (!ok) throw RankError("cannot complete an orthonormal basis");
  }
}

}  // namespace

PcaModel pca_fit(const SemanticEmbedding& embedding, std::size_t k) {
  const std::size_t n = embedding.n_classes();
  const std::size_t dim = embedding.dim;
  if (k == 0 || k > std::min(n, dim))
    throw RankError("k=" + std::to_string(k) + " exceeds min(n_classes=" + std::to_string(n) +
                    ", dim=" + std::to_string(dim) + ")");

  PcaModel model;
  model.mean.assign(dim, 0.0);
  for (std::size_t c = 0; c < n; ++c) {
    const double* row = embedding.vectors.row(c);
    for (std::size_t d = 0; d < dim; ++d) model.mean[d] += row[d];
  }
  for (double& m : model.mean) m /= static_cast<double>(n);

  Matrix centered(n, dim);
  for (std::size_t c = 0; c < n; ++c)
    for (std::size_t d = 0; d < dim; ++d)
      centered(c, d) = embedding.vectors(c, d) - model.mean[d];

  const double denom = n > 1 ? static_cast<double>(n - 1) : 1.0;
  model.components = Matrix(k, dim);
  model.eigenvalues.assign(k, 0.0);

  if (dim <= n) {
    // Direct covariance eigendecomposition.
    Matrix cov = matmul_tn(centered, centered);
    scale_inplace(cov, 1.0 / denom);
    Matrix vecs;
    jacobi_eigen(cov, vecs);

    std::vector<std::size_t> order(dim);
    for (std::size_t i = 0; i < dim; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return cov(a, a) > cov(b, b); });

    for (std::size_t r = 0; r < k; ++r) {
      const std::size_t src = order[r];
      model.eigenvalues[r] = cov(src, src);
      double* row = model.components.row(r);
      for (std::size_t d = 0; d < dim; ++d) row[d] = vecs(d, src);
      fix_sign(row, dim);
    }
  } else {
    // Gram-matrix form: eigenvectors of X X^T / (n-1) map back through X^T.
    Matrix gram = matmul_nt(centered, centered);
    scale_inplace(gram, 1.0 / denom);
    Matrix vecs;
    jacobi_eigen(gram, vecs);

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return gram(a, a) > gram(b, b); });

    double lambda_max = 0.0;
    for (std::size_t i = 0; i < n; ++i) lambda_max = std::max(lambda_max, gram(order[i], order[i]));
    const double rank_tol = std::max(lambda_max, 1.0) * 1e-12;

    std::size_t filled = 0;
    for (std::size_t r = 0; r < k; ++r) {
      const std::size_t src = order[r];
      const double lambda = gram(src, src);
      if (lambda <= rank_tol) break;  // remaining directions lie in the null space
      model.eigenvalues[r] = lambda;
      double* row = model.components.row(r);
      for (std::size_t d = 0; d < dim; ++d) {
        double s = 0.0;
        for (std::size_t c = 0; c < n; ++c) s += centered(c, d) * vecs(c, src);
        row[d] = s;
      }
      const double norm = l2_norm(row, dim);
      for (std::size_t d = 0; d < dim; ++d) row[d] /= norm;
      fix_sign(row, dim);
      ++filled;
    }
    complete_basis(model.components, filled);
  }
  return model;
}

SemanticEmbedding pca_transform(const PcaModel& model, const SemanticEmbedding& embedding) {
  if (embedding.dim != model.input_dim())
    throw DimensionMismatch("embedding dim " + std::to_string(embedding.dim) +
                            " does not match PCA input dim " + std::to_string(model.input_dim()));
  SemanticEmbedding out;
  out.stage = EmbeddingStage::denoised;
  out.dim = model.k();
  out.class_ids = embedding.class_ids;

  Matrix centered(embedding.n_classes(), embedding.dim);
  for (std::size_t c = 0; c < embedding.n_classes(); ++c)
    for (std::size_t d = 0; d < embedding.dim; ++d)
      centered(c, d) = embedding.vectors(c, d) - model.mean[d];
  out.vectors = matmul_nt(centered, model.components);
  return out;
}

}  // namespace mpgan
