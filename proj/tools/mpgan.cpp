// Command-line front end for the multi-patch generative ZSL pipeline:
// synth-data, ingest, train, synthesize, attention, evaluate, retrieve.
// Exit codes: 0 success, 2 config error, 3 data error, 4 numeric failure.

#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "mpgan/errors.hpp"
#include "mpgan/pipeline.hpp"

namespace {

int default_jobs() {
  if (const char* env = std::getenv("MPGAN_JOBS")) {
    const int jobs = std::atoi(env);
    if (jobs >= 1) return jobs;
  }
  return 1;
}

struct RunArgs {
  std::string config_path;
  std::string features, semantics, manifest, out_dir;
  std::string variant, attention_mode;
  std::uint64_t seed = 0;
  int jobs = 0;
  std::size_t iterations = 0;
  std::size_t n_synth = 0;

  CLI::App* attach(CLI::App& app, const char* name) {
    CLI::App* sub = app.add_subcommand(name, "");
    sub->add_option("--config", config_path, "run config JSON; flags override its fields");
    sub->add_option("--features", features, "feature bank (.mpfb)");
    sub->add_option("--semantics", semantics, "semantic bank (.mpse)");
    sub->add_option("--manifest", manifest, "dataset manifest JSON");
    sub->add_option("--out-dir", out_dir, "run output directory");
    sub->add_option("--seed", seed, "root seed");
    sub->add_option("--variant", variant, "mp_only|mp_mc|mp_mc_mcls|full");
    sub->add_option("--attention-mode", attention_mode, "raw|uniform");
    sub->add_option("--jobs", jobs, "patch-level workers (default: MPGAN_JOBS or 1)");
    sub->add_option("--iterations", iterations, "gan training iterations");
    sub->add_option("--n-synth", n_synth, "synthesised samples per unseen class");
    return sub;
  }

  mpgan::RunConfig to_config(const CLI::App* sub) const {
    mpgan::RunConfig cfg;
    if (!config_path.empty()) cfg = mpgan::run_config_from_json_file(config_path);
    if (sub->count("--features")) cfg.features = features;
    if (sub->count("--semantics")) cfg.semantics = semantics;
    if (sub->count("--manifest")) cfg.manifest = manifest;
    if (sub->count("--out-dir")) cfg.out_dir = out_dir;
    if (sub->count("--seed")) cfg.seed = seed;
    if (sub->count("--variant")) cfg.variant = mpgan::variant_from_string(variant);
    if (sub->count("--attention-mode"))
      cfg.attention_mode = mpgan::attention_mode_from_string(attention_mode);
    if (sub->count("--jobs"))
      cfg.jobs = jobs;
    else if (!sub->count("--config"))
      cfg.jobs = default_jobs();
    if (sub->count("--iterations")) cfg.gan.iterations = iterations;
    if (sub->count("--n-synth")) cfg.n_synth_per_class = n_synth;
    if (cfg.jobs < 1) throw mpgan::ConfigError("jobs must be >= 1");
    return cfg;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-patch generative zero-shot learning pipeline"};
  app.require_subcommand(1);

  // synth-data
  mpgan::SyntheticSpec spec;
  spec.patch_separations = {8.0, 8.0, 8.0};
  std::string sd_features = "features.mpfb", sd_semantics = "semantics.mpse",
              sd_manifest = "manifest.json";
  CLI::App* synth_data = app.add_subcommand("synth-data", "generate a synthetic dataset");
  synth_data->add_option("--seen", spec.n_seen, "seen class count");
  synth_data->add_option("--unseen", spec.n_unseen, "unseen class count");
  synth_data->add_option("--patches", spec.n_patches, "patch count");
  synth_data->add_option("--feat-dim", spec.feat_dim, "per-patch feature dim");
  synth_data->add_option("--semantic-dim", spec.semantic_dim, "semantic vector dim");
  synth_data->add_option("--samples-per-class", spec.samples_per_class, "samples per class");
  synth_data->add_option("--separations", spec.patch_separations,
                         "per-patch nearest-centroid spacing");
  synth_data->add_option("--sigma", spec.noise_sigma, "intra-class standard deviation");
  synth_data->add_option("--seed", spec.seed, "generator seed");
  synth_data->add_option("--features", sd_features, "output feature bank");
  synth_data->add_option("--semantics", sd_semantics, "output semantic bank");
  synth_data->add_option("--manifest", sd_manifest, "output manifest");

  // ingest
  std::string ingest_corpus, ingest_out = "semantics.mpse", ingest_manifest;
  bool ingest_seen_only = false;
  CLI::App* ingest = app.add_subcommand("ingest", "corpus JSON -> TF-IDF semantic bank");
  ingest->add_option("--corpus", ingest_corpus, "corpus JSON")->required();
  ingest->add_option("--out", ingest_out, "output semantic bank");
  ingest->add_flag("--seen-only", ingest_seen_only, "fit vocabulary/idf on seen classes only");
  ingest->add_option("--manifest", ingest_manifest, "manifest (required with --seen-only)");

  RunArgs train_args, synth_args, attn_args, eval_args, retr_args;
  CLI::App* train = train_args.attach(app, "train");
  train->description("train per-patch GANs, attention, classifiers");
  CLI::App* synthesize = synth_args.attach(app, "synthesize");
  synthesize->description("re-synthesise the unseen-class bank from checkpoints");
  CLI::App* attention = attn_args.attach(app, "attention");
  attention->description("compute discrimination-based attention weights");
  CLI::App* evaluate = eval_args.attach(app, "evaluate");
  evaluate->description("average per-class Top-1 on the unseen test set");
  CLI::App* retrieve = retr_args.attach(app, "retrieve");
  retrieve->description("zero-shot retrieval mAP at the configured fractions");

  try {
    app.parse(argc, argv);

    if (synth_data->parsed()) {
      mpgan::cmd_synth_data(spec, sd_features, sd_semantics, sd_manifest);
      std::cout << "wrote " << sd_features << ", " << sd_semantics << ", " << sd_manifest << "\n";
    } else if (ingest->parsed()) {
      mpgan::cmd_ingest(ingest_corpus, ingest_out, ingest_seen_only, ingest_manifest);
      std::cout << "wrote " << ingest_out << "\n";
    } else if (train->parsed()) {
      mpgan::cmd_train(train_args.to_config(train));
      std::cout << "train complete\n";
    } else if (synthesize->parsed()) {
      mpgan::cmd_synthesize(synth_args.to_config(synthesize));
      std::cout << "synthesis complete\n";
    } else if (attention->parsed()) {
      const mpgan::AttentionWeights w = mpgan::cmd_attention(attn_args.to_config(attention));
      for (std::size_t p = 0; p < w.n_patches(); ++p)
        std::cout << w.patch_names[p] << ": " << w.weights[p] << "\n";
    } else if (evaluate->parsed()) {
      const mpgan::EvalReport r = mpgan::cmd_evaluate(eval_args.to_config(evaluate));
      std::cout << "top1 " << r.top1 << "\n";
    } else if (retrieve->parsed()) {
      const mpgan::RetrievalReport r = mpgan::cmd_retrieve(retr_args.to_config(retrieve));
      for (const auto& [f, v] : r.map_at) std::cout << "mAP@" << f << " " << v << "\n";
    }
    return 0;
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  } catch (const mpgan::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    switch (e.kind) {
      case mpgan::Error::Kind::config: return 2;
      case mpgan::Error::Kind::data: return 3;
      case mpgan::Error::Kind::numeric: return 4;
    }
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
