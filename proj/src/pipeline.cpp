#include "mpgan/pipeline.hpp"

#include <algorithm>
#include <exception>
#include <map>
#include <omp.h>

#include <json.hpp>

#include "mpgan/errors.hpp"
#include "mpgan/io.hpp"
#include "mpgan/text.hpp"

namespace mpgan {

using nlohmann::json;
namespace fs = std::filesystem;

Variant variant_from_string(const std::string& s) {
  if (s == "mp_only") return Variant::mp_only;
  if (s == "mp_mc") return Variant::mp_mc;
  if (s == "mp_mc_mcls") return Variant::mp_mc_mcls;
  if (s == "full") return Variant::full;
  throw ConfigError("unknown variant: " + s);
}

std::string to_string(Variant v) {
  switch (v) {
    case Variant::mp_only: return "mp_only";
    case Variant::mp_mc: return "mp_mc";
    case Variant::mp_mc_mcls: return "mp_mc_mcls";
    case Variant::full: return "full";
  }
  return "full";
}

void RunConfig::validate_paths() const {
  for (const auto& [name, path] : {std::pair<const char*, const std::string&>{"features", features},
                                   {"semantics", semantics},
                                   {"manifest", manifest}})
    if (!fs::exists(path))
      throw DataError(std::string(name) + " path does not exist: " + path);
  if (out_dir.empty()) throw ConfigError("out_dir is required");
}

RunConfig run_config_from_json_string(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError("run config is not valid JSON: " + std::string(e.what()));
  }
  RunConfig cfg;
  try {
    cfg.seed = j.value("seed", cfg.seed);
    cfg.features = j.value("features", cfg.features);
    cfg.semantics = j.value("semantics", cfg.semantics);
    cfg.manifest = j.value("manifest", cfg.manifest);
    cfg.out_dir = j.value("out_dir", cfg.out_dir);
    if (j.contains("gan")) cfg.gan = gan_config_from_json_string(j.at("gan").dump());
    cfg.n_synth_per_class = j.value("n_synth_per_class", cfg.n_synth_per_class);
    if (j.contains("classifier")) {
      const auto& c = j.at("classifier");
      cfg.classifier.epochs = c.value("epochs", cfg.classifier.epochs);
      cfg.classifier.lr = c.value("lr", cfg.classifier.lr);
      cfg.classifier.batch_size = c.value("batch_size", cfg.classifier.batch_size);
    }
    if (j.contains("attention_mode"))
      cfg.attention_mode = attention_mode_from_string(j.at("attention_mode").get<std::string>());
    if (j.contains("inter_class_rule")) {
      const std::string rule = j.at("inter_class_rule").get<std::string>();
      if (rule == "centroid")
        cfg.inter_rule = InterClassRule::centroid_to_centroid;
      else if (rule == "nearest_sample")
        cfg.inter_rule = InterClassRule::nearest_sample;
      else
        throw ConfigError("unknown inter_class_rule: " + rule);
    }
    if (j.contains("variant")) cfg.variant = variant_from_string(j.at("variant").get<std::string>());
    if (j.contains("retrieval_fractions"))
      cfg.retrieval_fractions = j.at("retrieval_fractions").get<std::vector<double>>();
    cfg.jobs = j.value("jobs", cfg.jobs);
  } catch (const json::exception& e) {
    throw ConfigError("bad run config field: " + std::string(e.what()));
  }
  if (cfg.jobs < 1) throw ConfigError("jobs must be >= 1");
  cfg.gan.validate();
  return cfg;
}

RunConfig run_config_from_json_file(const fs::path& path) {
  return run_config_from_json_string(io::read_file(path));
}

std::string run_config_to_json_string(const RunConfig& cfg) {
  json j;
  j["seed"] = cfg.seed;
  j["features"] = cfg.features;
  j["semantics"] = cfg.semantics;
  j["manifest"] = cfg.manifest;
  j["out_dir"] = cfg.out_dir;
  j["gan"] = json::parse(gan_config_to_json_string(cfg.gan));
  j["n_synth_per_class"] = cfg.n_synth_per_class;
  j["classifier"] = {{"epochs", cfg.classifier.epochs},
                     {"lr", cfg.classifier.lr},
                     {"batch_size", cfg.classifier.batch_size}};
  j["attention_mode"] = to_string(cfg.attention_mode);
  j["inter_class_rule"] =
      cfg.inter_rule == InterClassRule::centroid_to_centroid ? "centroid" : "nearest_sample";
  j["variant"] = to_string(cfg.variant);
  j["retrieval_fractions"] = cfg.retrieval_fractions;
  j["jobs"] = cfg.jobs;
  return j.dump(2);
}

void cmd_synth_data(const SyntheticSpec& spec, const fs::path& features, const fs::path& semantics,
                    const fs::path& manifest) {
  SyntheticDataset ds = generate_synthetic_dataset(spec);
  save_feature_bank(ds.bank, features);
  save_semantic_bank(ds.semantics, semantics);
  DatasetManifest m;
  m.patch_names = ds.bank.patch_names;
  m.class_names = ds.class_names;
  m.seen = ds.split.seen();
  m.unseen = ds.split.unseen();
  m.split_name = to_string(ds.split.name());
  save_manifest(m, manifest);
}

void cmd_ingest(const fs::path& corpus_path, const fs::path& out_semantics, bool seen_only,
                const fs::path& manifest_path) {
  const Corpus corpus = load_corpus(corpus_path);
  SemanticEmbedding emb;
  if (seen_only) {
    if (manifest_path.empty())
      throw ConfigError("--seen-only ingestion needs a manifest for the split");
    emb = tfidf(corpus, load_manifest(manifest_path).split(), true);
  } else {
    emb = tfidf(corpus);
  }
  save_semantic_bank(emb, out_semantics);
}

namespace {

struct LoadedDataset {
  PatchFeatureBank bank;
  SemanticEmbedding semantics;
  DatasetManifest manifest;
  std::vector<int> sorted_seen;
  std::vector<int> sorted_unseen;
};

LoadedDataset load_dataset(const RunConfig& cfg) {
  LoadedDataset ds{load_feature_bank(cfg.features), load_semantic_bank(cfg.semantics),
                   load_manifest(cfg.manifest), {}, {}};
  const ClassSplit split = ds.manifest.split();
  ds.bank.validate_against(split);
  if (ds.manifest.patch_names.size() != ds.bank.n_patches)
    throw DimensionMismatch("manifest patch names do not match the feature bank");
  ds.bank.patch_names = ds.manifest.patch_names;
  ds.sorted_seen = split.seen();
  std::sort(ds.sorted_seen.begin(), ds.sorted_seen.end());
  ds.sorted_unseen = split.unseen();
  std::sort(ds.sorted_unseen.begin(), ds.sorted_unseen.end());
  return ds;
}

fs::path gan_path(const RunConfig& cfg, std::size_t p) {
  return fs::path(cfg.out_dir) / ("gan_patch_" + std::to_string(p) + ".ckpt");
}
fs::path trace_path(const RunConfig& cfg, std::size_t p) {
  return fs::path(cfg.out_dir) / ("trace_patch_" + std::to_string(p) + ".csv");
}
fs::path classifier_path(const RunConfig& cfg, std::size_t p) {
  return fs::path(cfg.out_dir) / ("classifier_patch_" + std::to_string(p) + ".ckpt");
}
fs::path concat_classifier_path(const RunConfig& cfg) {
  return fs::path(cfg.out_dir) / "classifier_concat.ckpt";
}
fs::path attention_path(const RunConfig& cfg) { return fs::path(cfg.out_dir) / "attention.json"; }
fs::path synth_path(const RunConfig& cfg) { return fs::path(cfg.out_dir) / "synth.mpfb"; }
fs::path denoised_path(const RunConfig& cfg) {
  return fs::path(cfg.out_dir) / "semantics_denoised.mpse";
}
fs::path ensemble_path(const RunConfig& cfg) { return fs::path(cfg.out_dir) / "ensemble.json"; }
fs::path run_manifest_path(const RunConfig& cfg) {
  return fs::path(cfg.out_dir) / "run_manifest.json";
}

// Patch loop with the requested worker count. Exceptions are captured and
// the lowest patch index wins, so failures are reproducible too.
template <typename Fn>
void for_each_patch(int jobs, std::size_t n_patches, Fn&& fn) {
  std::vector<std::exception_ptr> errors(n_patches);
  if (jobs <= 1) {
    for (std::size_t p = 0; p < n_patches; ++p) fn(p);
    return;
  }
#pragma omp parallel for schedule(dynamic, 1) num_threads(jobs)
  for (long p = 0; p < static_cast<long>(n_patches); ++p) {
    try {
      fn(static_cast<std::size_t>(p));
    } catch (...) {
      errors[p] = std::current_exception();
    }
  }
  for (const auto& err : errors)
    if (err) std::rethrow_exception(err);
}

// The conditioning bank the GANs see: the raw semantics for the fc
// denoiser, or the PCA projection (persisted, then reloaded so training and
// later re-synthesis read identical f32 values).
SemanticEmbedding conditioning_bank(const RunConfig& cfg, const LoadedDataset& ds,
                                    bool build_if_missing) {
  if (cfg.gan.denoiser.kind == DenoiserConfig::Kind::fc) return ds.semantics;
  const fs::path path = denoised_path(cfg);
  if (build_if_missing) {
    const PcaModel model = pca_fit(ds.semantics, cfg.gan.denoiser.dim);
    save_semantic_bank(pca_transform(model, ds.semantics), path);
  }
  if (!fs::exists(path)) throw MissingCheckpoint("denoised semantics not found: " + path.string());
  return load_semantic_bank(path, EmbeddingStage::denoised);
}

VisualPivots gan_pivots(const RunConfig& cfg, const LoadedDataset& ds, const ClassSplit& split,
                        const VisualPivots& class_pivots) {
  if (cfg.variant != Variant::mp_only) return class_pivots;

  // mp_only: the one global centroid of the concatenated seen features,
  // split back per patch meaning every class is pulled to the same target.
  VisualPivots global = class_pivots;
  const std::size_t Y = global.n_classes();
  Matrix patch_mean(ds.bank.n_patches, ds.bank.feat_dim);
  std::size_t n_seen_samples = 0;
  for (std::size_t s = 0; s < ds.bank.n_samples(); ++s) {
    if (!split.is_seen(ds.bank.labels[s])) continue;
    ++n_seen_samples;
    for (std::size_t p = 0; p < ds.bank.n_patches; ++p) {
      const double* feat = ds.bank.patch(s, p);
      double* row = patch_mean.row(p);
      for (std::size_t d = 0; d < ds.bank.feat_dim; ++d) row[d] += feat[d];
    }
  }
  for (std::size_t p = 0; p < ds.bank.n_patches; ++p) {
    double* row = patch_mean.row(p);
    for (std::size_t d = 0; d < ds.bank.feat_dim; ++d) row[d] /= static_cast<double>(n_seen_samples);
    for (std::size_t yi = 0; yi < Y; ++yi)
      std::copy(row, row + ds.bank.feat_dim, global.centroids.row(p * Y + yi));
  }
  return global;
}

void synthesize_bank(const RunConfig& cfg, const LoadedDataset& ds,
                     const SemanticEmbedding& cond) {
  const std::size_t P = ds.bank.n_patches;
  const std::size_t Y = ds.sorted_unseen.size();
  const std::size_t n = cfg.n_synth_per_class;

  PatchFeatureBank synth;
  synth.n_patches = P;
  synth.feat_dim = ds.bank.feat_dim;
  synth.patch_names = ds.bank.patch_names;
  synth.labels.resize(Y * n);
  synth.features.resize(Y * n * P * synth.feat_dim);
  for (std::size_t yi = 0; yi < Y; ++yi)
    for (std::size_t i = 0; i < n; ++i) synth.labels[yi * n + i] = ds.sorted_unseen[yi];

  const Rng root(cfg.seed);
  for_each_patch(cfg.jobs, P, [&](std::size_t p) {
    const PatchGan gan = load_patch_gan(gan_path(cfg, p));
    if (gan.patch_index != p) throw FormatError("gan checkpoint has the wrong patch index");
    Rng noise = root.substream("synthesize").substream(p);
    for (std::size_t yi = 0; yi < Y; ++yi) {
      const Matrix fake = synthesize(gan, cond.vector_of(ds.sorted_unseen[yi]), n, noise);
      for (std::size_t i = 0; i < n; ++i)
        std::copy(fake.row(i), fake.row(i) + synth.feat_dim, synth.patch(yi * n + i, p));
    }
  });
  save_feature_bank(synth, synth_path(cfg));
}

json hash_entry(const fs::path& path) {
  return json{{"path", path.string()}, {"fnv1a64", io::hash_file(path)}};
}

void write_run_manifest(const RunConfig& cfg, const std::vector<fs::path>& artifacts) {
  json j;
  j["config"] = json::parse(run_config_to_json_string(cfg));
  j["inputs"] = {hash_entry(cfg.features), hash_entry(cfg.semantics), hash_entry(cfg.manifest)};
  json arts = json::array();
  for (const auto& a : artifacts) arts.push_back(hash_entry(a));
  j["artifacts"] = arts;
  j["format_versions"] = {{"feature_bank", 1}, {"semantic_bank", 1}, {"checkpoint", 1}};
  io::atomic_write_file(run_manifest_path(cfg), j.dump(2) + "\n");
}

std::vector<int> class_index_labels(const std::vector<int>& labels,
                                    const std::vector<int>& sorted_ids) {
  std::map<int, int> index;
  for (std::size_t i = 0; i < sorted_ids.size(); ++i) index[sorted_ids[i]] = static_cast<int>(i);
  std::vector<int> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) out[i] = index.at(labels[i]);
  return out;
}

}  // namespace

void cmd_train(const RunConfig& cfg) {
  cfg.validate_paths();
  const LoadedDataset ds = load_dataset(cfg);
  const ClassSplit split = ds.manifest.split();
  fs::create_directories(cfg.out_dir);

  const VisualPivots class_pivots = compute_visual_pivots(ds.bank, split);
  const VisualPivots train_pivots = gan_pivots(cfg, ds, split, class_pivots);

  const SemanticEmbedding cond = conditioning_bank(cfg, ds, /*build_if_missing=*/true);

  const Rng root(cfg.seed);
  std::vector<fs::path> artifacts;

  for_each_patch(cfg.jobs, ds.bank.n_patches, [&](std::size_t p) {
    GanConfig gan_cfg = cfg.gan;
    gan_cfg.seed = root.substream("gan").substream(p).seed();
    PatchGan gan = make_patch_gan(p, ds.bank.feat_dim, cond.dim, ds.sorted_seen.size(), gan_cfg);
    const LossTrace trace = train_patch(gan, ds.bank, cond, split, train_pivots);
    save_patch_gan(gan, gan_path(cfg, p));
    save_trace(trace, trace_path(cfg, p));
  });
  for (std::size_t p = 0; p < ds.bank.n_patches; ++p) {
    artifacts.push_back(gan_path(cfg, p));
    artifacts.push_back(trace_path(cfg, p));
  }

  // Attention always comes from the real per-class pivots, whatever pivots
  // the GANs trained against.
  const AttentionWeights attn = attention_weights(ds.bank, split, class_pivots, cfg.inter_rule);
  save_attention(attn, attention_path(cfg));
  artifacts.push_back(attention_path(cfg));
  if (cfg.gan.denoiser.kind == DenoiserConfig::Kind::pca) artifacts.push_back(denoised_path(cfg));

  synthesize_bank(cfg, ds, cond);
  artifacts.push_back(synth_path(cfg));

  const PatchFeatureBank synth = load_feature_bank(synth_path(cfg));
  const std::vector<int> labels = class_index_labels(synth.labels, ds.sorted_unseen);
  const std::size_t Y = ds.sorted_unseen.size();

  json ensemble_meta;
  ensemble_meta["variant"] = to_string(cfg.variant);
  ensemble_meta["unseen_labels"] = ds.sorted_unseen;
  ensemble_meta["attention"] = attention_path(cfg).filename().string();
  ensemble_meta["synth_bank"] = synth_path(cfg).filename().string();
  json classifier_files = json::array();

  if (cfg.variant == Variant::full) {
    std::vector<Matrix> per_patch(synth.n_patches);
    for (std::size_t p = 0; p < synth.n_patches; ++p) {
      per_patch[p] = Matrix(synth.n_samples(), synth.feat_dim);
      for (std::size_t s = 0; s < synth.n_samples(); ++s)
        std::copy(synth.patch(s, p), synth.patch(s, p) + synth.feat_dim, per_patch[p].row(s));
    }
    std::vector<Mlp> classifiers(synth.n_patches);
    for_each_patch(cfg.jobs, synth.n_patches, [&](std::size_t p) {
      classifiers[p] = train_softmax_classifier(per_patch[p], labels, Y, cfg.classifier,
                                                root.substream("classifier").substream(p));
    });
    for (std::size_t p = 0; p < synth.n_patches; ++p) {
      json meta{{"patch_index", p}, {"unseen_labels", ds.sorted_unseen}};
      const Mlp* net = &classifiers[p];
      save_checkpoint(classifier_path(cfg, p), meta.dump(), std::span<const Mlp* const>(&net, 1));
      classifier_files.push_back(classifier_path(cfg, p).filename().string());
      artifacts.push_back(classifier_path(cfg, p));
    }
  } else if (cfg.variant == Variant::mp_mc_mcls) {
    Matrix concat(synth.n_samples(), synth.n_patches * synth.feat_dim);
    for (std::size_t s = 0; s < synth.n_samples(); ++s)
      std::copy(synth.patch(s, 0), synth.patch(s, 0) + concat.cols, concat.row(s));
    const Mlp net = train_softmax_classifier(concat, labels, Y, cfg.classifier,
                                             root.substream("classifier").substream("concat"));
    json meta{{"unseen_labels", ds.sorted_unseen}};
    const Mlp* ptr = &net;
    save_checkpoint(concat_classifier_path(cfg), meta.dump(), std::span<const Mlp* const>(&ptr, 1));
    classifier_files.push_back(concat_classifier_path(cfg).filename().string());
    artifacts.push_back(concat_classifier_path(cfg));
  }
  // mp_only and mp_mc predict by nearest synthesised centroid; no classifier.

  ensemble_meta["classifiers"] = classifier_files;
  io::atomic_write_file(ensemble_path(cfg), ensemble_meta.dump(2) + "\n");
  artifacts.push_back(ensemble_path(cfg));

  write_run_manifest(cfg, artifacts);
}

void cmd_synthesize(const RunConfig& cfg) {
  cfg.validate_paths();
  const LoadedDataset ds = load_dataset(cfg);
  if (!fs::exists(gan_path(cfg, 0)))
    throw MissingCheckpoint("no gan checkpoints under " + cfg.out_dir);
  const SemanticEmbedding cond = conditioning_bank(cfg, ds, /*build_if_missing=*/false);
  synthesize_bank(cfg, ds, cond);
}

AttentionWeights cmd_attention(const RunConfig& cfg) {
  cfg.validate_paths();
  const LoadedDataset ds = load_dataset(cfg);
  const ClassSplit split = ds.manifest.split();
  fs::create_directories(cfg.out_dir);
  const VisualPivots pivots = compute_visual_pivots(ds.bank, split);
  const AttentionWeights attn = attention_weights(ds.bank, split, pivots, cfg.inter_rule);
  save_attention(attn, attention_path(cfg));
  return attn;
}

namespace {

struct TestSet {
  std::vector<std::size_t> samples;
  PatchFeatureBank bank;  // unseen-class samples only
};

TestSet unseen_test_set(const LoadedDataset& ds, const ClassSplit& split) {
  TestSet t;
  t.bank.n_patches = ds.bank.n_patches;
  t.bank.feat_dim = ds.bank.feat_dim;
  t.bank.patch_names = ds.bank.patch_names;
  for (std::size_t s = 0; s < ds.bank.n_samples(); ++s)
    if (split.is_unseen(ds.bank.labels[s])) t.samples.push_back(s);
  t.bank.labels.reserve(t.samples.size());
  t.bank.features.reserve(t.samples.size() * ds.bank.n_patches * ds.bank.feat_dim);
  for (std::size_t s : t.samples) {
    t.bank.labels.push_back(ds.bank.labels[s]);
    const double* begin = ds.bank.patch(s, 0);
    t.bank.features.insert(t.bank.features.end(), begin,
                           begin + ds.bank.n_patches * ds.bank.feat_dim);
  }
  return t;
}

json load_ensemble_meta(const RunConfig& cfg) {
  if (!fs::exists(ensemble_path(cfg)))
    throw MissingCheckpoint("ensemble manifest not found: " + ensemble_path(cfg).string());
  try {
    return json::parse(io::read_file(ensemble_path(cfg)));
  } catch (const json::exception& e) {
    throw FormatError("ensemble manifest is not valid JSON: " + std::string(e.what()));
  }
}

Mlp load_single_net(const fs::path& path) {
  std::vector<Mlp> nets;
  load_checkpoint(path, nets);
  if (nets.size() != 1) throw FormatError("expected a single net in " + path.string());
  return std::move(nets[0]);
}

}  // namespace

EvalReport cmd_evaluate(const RunConfig& cfg) {
  cfg.validate_paths();
  const LoadedDataset ds = load_dataset(cfg);
  const ClassSplit split = ds.manifest.split();
  const TestSet test = unseen_test_set(ds, split);
  if (test.bank.labels.empty()) throw EmptyClass("no unseen-class samples to evaluate");

  const json meta = load_ensemble_meta(cfg);
  const Variant variant = variant_from_string(meta.at("variant").get<std::string>());
  const std::vector<int> unseen = meta.at("unseen_labels").get<std::vector<int>>();

  std::vector<std::pair<int, int>> pairs(test.bank.n_samples());

  if (variant == Variant::full) {
    EnsembleModel model;
    model.unseen_labels = unseen;
    const AttentionWeights attn = load_attention(attention_path(cfg));
    model.patch_weights = apply_mode(attn, cfg.attention_mode);
    for (std::size_t p = 0; p < test.bank.n_patches; ++p)
      model.classifiers.push_back(load_single_net(classifier_path(cfg, p)));

#pragma omp parallel for schedule(static)
    for (long s = 0; s < static_cast<long>(test.bank.n_samples()); ++s) {
      std::vector<const double*> patches(test.bank.n_patches);
      for (std::size_t p = 0; p < test.bank.n_patches; ++p) patches[p] = test.bank.patch(s, p);
      const EnsemblePrediction pred = ensemble_predict(model, patches, test.bank.feat_dim);
      pairs[s] = {test.bank.labels[s], model.unseen_labels[pred.class_index]};
    }
  } else if (variant == Variant::mp_mc_mcls) {
    const Mlp net = load_single_net(concat_classifier_path(cfg));
#pragma omp parallel for schedule(static)
    for (long s = 0; s < static_cast<long>(test.bank.n_samples()); ++s) {
      const Vector probs = patch_probabilities(net, test.bank.patch(s, 0),
                                               test.bank.n_patches * test.bank.feat_dim);
      pairs[s] = {test.bank.labels[s], unseen[single_patch_predict(probs)]};
    }
  } else {
    // mp_only / mp_mc: nearest synthesised class centroid over unweighted
    // summed patch distances.
    const SynthCentroids cents = synth_centroids_from_bank(load_feature_bank(synth_path(cfg)));
#pragma omp parallel for schedule(static)
    for (long s = 0; s < static_cast<long>(test.bank.n_samples()); ++s) {
      std::size_t best = 0;
      double best_score = 0.0;
      for (std::size_t yi = 0; yi < cents.n_classes(); ++yi) {
        double score = 0.0;
        for (std::size_t p = 0; p < cents.n_patches; ++p)
          score += euclidean_distance(test.bank.patch(s, p), cents.centroid(p, yi),
                                      cents.feat_dim);
        if (yi == 0 || score < best_score) {
          best = yi;
          best_score = score;
        }
      }
      pairs[s] = {test.bank.labels[s], cents.class_ids[best]};
    }
  }

  const EvalReport report = top1(pairs);
  save_eval_report(report, fs::path(cfg.out_dir) / "report.json");
  return report;
}

RetrievalReport cmd_retrieve(const RunConfig& cfg) {
  cfg.validate_paths();
  const LoadedDataset ds = load_dataset(cfg);
  const ClassSplit split = ds.manifest.split();
  const TestSet test = unseen_test_set(ds, split);

  const json meta = load_ensemble_meta(cfg);
  const Variant variant = variant_from_string(meta.at("variant").get<std::string>());
  if (!fs::exists(synth_path(cfg)))
    throw MissingCheckpoint("synthesised bank not found: " + synth_path(cfg).string());
  const SynthCentroids cents = synth_centroids_from_bank(load_feature_bank(synth_path(cfg)));

  Vector weights(cents.n_patches, 1.0);
  if (variant == Variant::full) {
    const AttentionWeights attn = load_attention(attention_path(cfg));
    weights = apply_mode(attn, cfg.attention_mode);
  }

  const RetrievalReport report = retrieve(cents, weights, test.bank, cfg.retrieval_fractions);
  save_retrieval_report(report, fs::path(cfg.out_dir) / "retrieval.json");
  return report;
}

}  // namespace mpgan
