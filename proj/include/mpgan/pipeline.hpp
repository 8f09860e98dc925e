#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mpgan/attention.hpp"
#include "mpgan/data.hpp"
#include "mpgan/ensemble.hpp"
#include "mpgan/evaluation.hpp"
#include "mpgan/gan.hpp"

// End-to-end orchestration shared by the CLI and the test suites: data
// ingestion, per-patch training, synthesis, attention, ensemble training,
// evaluation and retrieval, plus the run manifest that pins every input and
// artifact hash needed to reproduce a run bit-exactly.

namespace mpgan {

enum class Variant { mp_only, mp_mc, mp_mc_mcls, full };
Variant variant_from_string(const std::string& s);
std::string to_string(Variant v);

struct RunConfig {
  std::uint64_t seed = 42;
  std::string features;
  std::string semantics;
  std::string manifest;
  std::string out_dir;
  GanConfig gan;
  std::size_t n_synth_per_class = 300;
  ClassifierConfig classifier;
  AttentionMode attention_mode = AttentionMode::raw;
  InterClassRule inter_rule = InterClassRule::centroid_to_centroid;
  Variant variant = Variant::full;
  std::vector<double> retrieval_fractions = {0.25, 0.5, 1.0};
  int jobs = 1;

  void validate_paths() const;
};

RunConfig run_config_from_json_string(const std::string& text);
RunConfig run_config_from_json_file(const std::filesystem::path& path);
std::string run_config_to_json_string(const RunConfig& cfg);

// Writes feature bank, semantic bank and manifest for a synthetic dataset.
void cmd_synth_data(const SyntheticSpec& spec, const std::filesystem::path& features,
                    const std::filesystem::path& semantics, const std::filesystem::path& manifest);

// Corpus JSON -> TF-IDF semantic bank. When seen_only is set the vocabulary
// and document frequencies are fit on seen classes (manifest required).
void cmd_ingest(const std::filesystem::path& corpus, const std::filesystem::path& out_semantics,
                bool seen_only = false, const std::filesystem::path& manifest = {});

// Full training pass: P GAN checkpoints + traces, attention weights,
// synthesised bank, classifiers per variant, ensemble and run manifests.
void cmd_train(const RunConfig& cfg);

// Re-synthesises the unseen-class bank from existing checkpoints.
void cmd_synthesize(const RunConfig& cfg);

// Computes and writes attention weights from the real seen features.
AttentionWeights cmd_attention(const RunConfig& cfg);

EvalReport cmd_evaluate(const RunConfig& cfg);
RetrievalReport cmd_retrieve(const RunConfig& cfg);

}  // namespace mpgan
