#include "mpgan/data.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <set>
#include <unordered_map>

#include <json.hpp>

#include "mpgan/errors.hpp"
#include "mpgan/io.hpp"
#include "mpgan/rng.hpp"

namespace mpgan {

using nlohmann::json;

std::string to_string(SplitName n) {
  switch (n) {
    case SplitName::scs: return "SCS";
    case SplitName::sce: return "SCE";
    case SplitName::synthetic: return "synthetic";
  }
  return "synthetic";
}

SplitName split_name_from_string(const std::string& s) {
  if (s == "SCS") return SplitName::scs;
  if (s == "SCE") return SplitName::sce;
  if (s == "synthetic") return SplitName::synthetic;
  throw FormatError("unknown split name: " + s);
}

ClassSplit::ClassSplit(std::vector<int> seen, std::vector<int> unseen, SplitName name)
    : seen_(std::move(seen)), unseen_(std::move(unseen)), name_(name) {
  if (seen_.empty() || unseen_.empty())
    throw InvalidSpec("class split requires non-empty seen and unseen sets");
  std::set<int> s(seen_.begin(), seen_.end());
  std::set<int> u(unseen_.begin(), unseen_.end());
  if (s.size() != seen_.size() || u.size() != unseen_.size())
    throw InvalidSpec("duplicate class ids in split");
  for (int id : seen_)
    if (u.count(id)) throw InvalidSpec("class " + std::to_string(id) + " appears in both sides of the split");
}

bool ClassSplit::is_seen(int class_id) const {
  return std::find(seen_.begin(), seen_.end(), class_id) != seen_.end();
}

bool ClassSplit::is_unseen(int class_id) const {
  return std::find(unseen_.begin(), unseen_.end(), class_id) != unseen_.end();
}

void PatchFeatureBank::validate_against(const ClassSplit& split) const {
  for (int label : labels)
    if (!split.is_seen(label) && !split.is_unseen(label))
      throw MissingClass("sample label " + std::to_string(label) + " is in neither side of the split");
}

std::size_t SemanticEmbedding::row_of(int class_id) const {
  for (std::size_t i = 0; i < class_ids.size(); ++i)
    if (class_ids[i] == class_id) return i;
  throw MissingClass("no semantic vector for class " + std::to_string(class_id));
}

const double* SemanticEmbedding::vector_of(int class_id) const {
  return vectors.row(row_of(class_id));
}

std::size_t VisualPivots::index_of(int class_id) const {
  for (std::size_t i = 0; i < class_ids.size(); ++i)
    if (class_ids[i] == class_id) return i;
  throw MissingPivot("no pivot for class " + std::to_string(class_id));
}

void SyntheticSpec::validate() const {
  if (n_seen < 1 || n_unseen < 1 || n_patches < 1 || feat_dim < 1 || semantic_dim < 1 ||
      samples_per_class < 1)
    throw InvalidSpec("all synthetic counts must be >= 1");
  if (noise_sigma <= 0.0) throw InvalidSpec("noise_sigma must be > 0");
  if (patch_separations.size() != n_patches)
    throw InvalidSpec("patch_separations must have one entry per patch");
  for (double s : patch_separations)
    if (s < 0.0) throw InvalidSpec("patch separations must be >= 0");
}

VisualPivots compute_visual_pivots(const PatchFeatureBank& bank, const ClassSplit& split) {
  VisualPivots out;
  out.n_patches = bank.n_patches;
  out.feat_dim = bank.feat_dim;
  out.class_ids = split.seen();
  std::sort(out.class_ids.begin(), out.class_ids.end());

  const std::size_t y_count = out.class_ids.size();
  out.class_counts.assign(y_count, 0);
  out.centroids = Matrix(bank.n_patches * y_count, bank.feat_dim);

  std::unordered_map<int, std::size_t> index;
  for (std::size_t i = 0; i < y_count; ++i) index[out.class_ids[i]] = i;

  for (std::size_t s = 0; s < bank.n_samples(); ++s) {
    auto it = index.find(bank.labels[s]);
    if (it == index.end()) continue;  // unseen samples take no part in pivots
    ++out.class_counts[it->second];
    for (std::size_t p = 0; p < bank.n_patches; ++p) {
      double* row = out.centroids.row(p * y_count + it->second);
      const double* feat = bank.patch(s, p);
      for (std::size_t d = 0; d < bank.feat_dim; ++d) row[d] += feat[d];
    }
  }

  for (std::size_t yi = 0; yi < y_count; ++yi) {
    if (out.class_counts[yi] == 0)
      throw MissingClass("seen class " + std::to_string(out.class_ids[yi]) + " has no samples");
    const double inv = 1.0 / static_cast<double>(out.class_counts[yi]);
    for (std::size_t p = 0; p < bank.n_patches; ++p) {
      double* row = out.centroids.row(p * y_count + yi);
      for (std::size_t d = 0; d < bank.feat_dim; ++d) row[d] *= inv;
    }
  }
  return out;
}

namespace {
double quantize(double v) { return static_cast<double>(static_cast<float>(v)); }
}  // namespace

SyntheticDataset generate_synthetic_dataset(const SyntheticSpec& spec) {
  spec.validate();
  const std::size_t n_classes = spec.n_seen + spec.n_unseen;
  Rng root(spec.seed);

  // One semantic vector per class, uniform in [0,1]^d.
  Matrix semantics(n_classes, spec.semantic_dim);
  {
    Rng rng = root.substream("semantics");
    for (std::size_t c = 0; c < n_classes; ++c)
      for (std::size_t d = 0; d < spec.semantic_dim; ++d)
        semantics(c, d) = quantize(rng.uniform01());
  }

  // Per patch, class centroids are a random linear image of the semantics,
  // rescaled to the requested nearest-centroid spacing and shifted so every
  // centroid coordinate clears 3 sigma (the generator's output is ReLU-
  // bounded, so targets must be reachable in the non-negative orthant).
  std::vector<Matrix> centroids(spec.n_patches);
  for (std::size_t p = 0; p < spec.n_patches; ++p) {
    Rng rng = root.substream("patch-map").substream(p);
    Matrix map(spec.feat_dim, spec.semantic_dim);
    for (double& v : map.data) v = rng.normal();

    Matrix c = matmul_nt(semantics, map);  // n_classes x feat_dim

    double min_spacing = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < n_classes; ++a)
      for (std::size_t b = a + 1; b < n_classes; ++b)
        min_spacing = std::min(min_spacing,
                               euclidean_distance(c.row(a), c.row(b), spec.feat_dim));

    const double scale =
        (spec.patch_separations[p] > 0.0 && min_spacing > 0.0)
            ? spec.patch_separations[p] / min_spacing
            : 0.0;
    scale_inplace(c, scale);

    double min_coord = std::numeric_limits<double>::infinity();
    for (double v : c.data) min_coord = std::min(min_coord, v);
    const double margin = 3.0 * spec.noise_sigma;
    const double shift = min_coord < margin ? margin - min_coord : 0.0;
    for (double& v : c.data) v += shift;
    centroids[p] = std::move(c);
  }

  SyntheticDataset out{
      PatchFeatureBank{},
      SemanticEmbedding{},
      ClassSplit{[&] {
                   std::vector<int> seen(spec.n_seen);
                   for (std::size_t i = 0; i < spec.n_seen; ++i) seen[i] = static_cast<int>(i);
                   return seen;
                 }(),
                 [&] {
                   std::vector<int> unseen(spec.n_unseen);
                   for (std::size_t i = 0; i < spec.n_unseen; ++i)
                     unseen[i] = static_cast<int>(spec.n_seen + i);
                   return unseen;
                 }(),
                 SplitName::synthetic},
      {}};

  PatchFeatureBank& bank = out.bank;
  bank.n_patches = spec.n_patches;
  bank.feat_dim = spec.feat_dim;
  for (std::size_t p = 0; p < spec.n_patches; ++p)
    bank.patch_names.push_back("patch_" + std::to_string(p));

  const std::size_t n_samples = n_classes * spec.samples_per_class;
  bank.labels.reserve(n_samples);
  bank.features.resize(n_samples * spec.n_patches * spec.feat_dim);

  std::size_t s = 0;
  for (std::size_t y = 0; y < n_classes; ++y) {
    Rng rng = root.substream("samples").substream(y);
    for (std::size_t i = 0; i < spec.samples_per_class; ++i, ++s) {
      bank.labels.push_back(static_cast<int>(y));
      for (std::size_t p = 0; p < spec.n_patches; ++p) {
        double* feat = bank.patch(s, p);
        const double* c = centroids[p].row(y);
        for (std::size_t d = 0; d < spec.feat_dim; ++d)
          feat[d] = quantize(c[d] + spec.noise_sigma * rng.normal());
      }
    }
  }

  SemanticEmbedding& emb = out.semantics;
  emb.stage = EmbeddingStage::raw_tfidf;
  emb.dim = spec.semantic_dim;
  emb.vectors = std::move(semantics);
  for (std::size_t c = 0; c < n_classes; ++c) emb.class_ids.push_back(static_cast<int>(c));

  for (std::size_t c = 0; c < n_classes; ++c) out.class_names.push_back("class_" + std::to_string(c));
  return out;
}

void save_feature_bank(const PatchFeatureBank& bank, const std::filesystem::path& path) {
  if (bank.n_patches == 0 || bank.feat_dim == 0)
    throw DimensionMismatch("feature bank has zero patches or zero feature dim");
  io::atomic_write_file(path, [&](std::ostream& os) {
    io::write_magic(os, "MPFB");
    io::write_u32(os, 1);
    io::write_u32(os, static_cast<std::uint32_t>(bank.n_patches));
    io::write_u32(os, static_cast<std::uint32_t>(bank.feat_dim));
    io::write_u64(os, bank.n_samples());
    std::vector<float> buf(bank.n_patches * bank.feat_dim);
    for (std::size_t s = 0; s < bank.n_samples(); ++s) {
      io::write_u32(os, static_cast<std::uint32_t>(bank.labels[s]));
      const double* feat = bank.patch(s, 0);
      for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = static_cast<float>(feat[i]);
      io::write_f32_block(os, buf.data(), buf.size());
    }
  });
}

PatchFeatureBank load_feature_bank(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open feature bank: " + path.string());
  io::expect_magic(is, "MPFB", "feature bank");
  if (io::read_u32(is, "version") != 1) throw FormatError("unsupported feature bank version");

  PatchFeatureBank bank;
  bank.n_patches = io::read_u32(is, "n_patches");
  bank.feat_dim = io::read_u32(is, "feat_dim");
  if (bank.n_patches == 0 || bank.feat_dim == 0)
    throw DimensionMismatch("feature bank declares zero patches or zero feature dim");
  const std::uint64_t n_samples = io::read_u64(is, "n_samples");

  bank.labels.reserve(n_samples);
  bank.features.resize(n_samples * bank.n_patches * bank.feat_dim);
  std::vector<float> buf(bank.n_patches * bank.feat_dim);
  for (std::uint64_t s = 0; s < n_samples; ++s) {
    bank.labels.push_back(static_cast<int>(io::read_u32(is, "class_id")));
    io::read_f32_block(is, buf.data(), buf.size(), "features");
    double* feat = bank.features.data() + s * buf.size();
    for (std::size_t i = 0; i < buf.size(); ++i) feat[i] = static_cast<double>(buf[i]);
  }
  if (is.peek() != std::ifstream::traits_type::eof())
    throw FormatError("trailing bytes after feature bank payload");

  for (std::size_t p = 0; p < bank.n_patches; ++p)
    bank.patch_names.push_back("patch_" + std::to_string(p));
  return bank;
}

void save_semantic_bank(const SemanticEmbedding& emb, const std::filesystem::path& path) {
  if (emb.dim == 0 || emb.n_classes() == 0)
    throw DimensionMismatch("semantic bank has zero classes or zero dim");
  io::atomic_write_file(path, [&](std::ostream& os) {
    io::write_magic(os, "MPSE");
    io::write_u32(os, 1);
    io::write_u32(os, static_cast<std::uint32_t>(emb.n_classes()));
    io::write_u32(os, static_cast<std::uint32_t>(emb.dim));
    std::vector<float> buf(emb.dim);
    for (std::size_t c = 0; c < emb.n_classes(); ++c) {
      io::write_u32(os, static_cast<std::uint32_t>(emb.class_ids[c]));
      const double* row = emb.vectors.row(c);
      for (std::size_t i = 0; i < emb.dim; ++i) buf[i] = static_cast<float>(row[i]);
      io::write_f32_block(os, buf.data(), buf.size());
    }
  });
}

SemanticEmbedding load_semantic_bank(const std::filesystem::path& path, EmbeddingStage stage) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open semantic bank: " + path.string());
  io::expect_magic(is, "MPSE", "semantic bank");
  if (io::read_u32(is, "version") != 1) throw FormatError("unsupported semantic bank version");

  SemanticEmbedding emb;
  emb.stage = stage;
  const std::uint32_t n_classes = io::read_u32(is, "n_classes");
  emb.dim = io::read_u32(is, "dim");
  if (n_classes == 0 || emb.dim == 0)
    throw DimensionMismatch("semantic bank declares zero classes or zero dim");

  emb.vectors = Matrix(n_classes, emb.dim);
  std::vector<float> buf(emb.dim);
  for (std::uint32_t c = 0; c < n_classes; ++c) {
    emb.class_ids.push_back(static_cast<int>(io::read_u32(is, "class_id")));
    io::read_f32_block(is, buf.data(), buf.size(), "semantic vector");
    double* row = emb.vectors.row(c);
    for (std::size_t i = 0; i < emb.dim; ++i) row[i] = static_cast<double>(buf[i]);
  }
  if (is.peek() != std::ifstream::traits_type::eof())
    throw FormatError("trailing bytes after semantic bank payload");

  if (stage == EmbeddingStage::raw_tfidf)
    for (double v : emb.vectors.data)
      if (v < 0.0) throw FormatError("raw tf-idf semantic bank contains negative entries");
  return emb;
}

ClassSplit DatasetManifest::split() const {
  return ClassSplit(seen, unseen, split_name_from_string(split_name));
}

void save_manifest(const DatasetManifest& m, const std::filesystem::path& path) {
  json j;
  j["patch_names"] = m.patch_names;
  j["class_names"] = m.class_names;
  j["seen"] = m.seen;
  j["unseen"] = m.unseen;
  j["split_name"] = m.split_name;
  j["normalization"] = "none";
  io::atomic_write_file(path, j.dump(2) + "\n");
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(io::read_file(path));
  } catch (const json::exception& e) {
    throw FormatError("manifest is not valid JSON: " + std::string(e.what()));
  }
  DatasetManifest m;
  try {
    m.patch_names = j.at("patch_names").get<std::vector<std::string>>();
    m.class_names = j.at("class_names").get<std::vector<std::string>>();
    m.seen = j.at("seen").get<std::vector<int>>();
    m.unseen = j.at("unseen").get<std::vector<int>>();
    m.split_name = j.at("split_name").get<std::string>();
  } catch (const json::exception& e) {
    throw FormatError("manifest missing required field: " + std::string(e.what()));
  }
  m.split();  // validates the label sets
  return m;
}

}  // namespace mpgan
