#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "layoutlab/generate.hpp"
#include "layoutlab/trainer.hpp"

namespace layoutlab {

struct AblationConfig {
  ModelConfig model = ModelConfig::desk();
  TrainConfig train;
  SamplerConfig sampler;
  int scenes = 1000;  // generated per variant
  int threads = 0;
  std::vector<Variant> variants{Variant::kV0, Variant::kV1, Variant::kV2, Variant::kV3};
  // Directory of cached checkpoints keyed by corpus and configuration; empty
  // disables caching.
  std::string cache_dir;

  nlohmann::json to_json() const;
};

struct AblationRow {
  Variant variant = Variant::kV0;
  int scenes = 0;  // successfully generated
  int failed = 0;
  double mean = 0.0;
  double stddev = 0.0;
  double ci_low = 0.0;  // 95% normal interval of the mean
  double ci_high = 0.0;
  int best_epoch = 0;
  double best_val_loss = 0.0;
  bool cached = false;
};

struct AblationReport {
  ExpertKind expert = ExpertKind::kErgonomic;
  std::vector<AblationRow> rows;
  const AblationRow* find(Variant v) const;
};

struct AblationCallbacks {
  std::function<void(Variant, const EpochMetrics&)> on_epoch;
  std::function<void(const AblationRow&)> on_variant;
};

// Key of a cached checkpoint: the corpus, codec, model and training settings.
// V0 ignores the expert, so its key omits it and the two ablations share it.
std::string checkpoint_key(const Corpus& corpus, const CodecConfig& codec, const Taxonomy& taxonomy,
                           const ModelConfig& model, const TrainConfig& train, Variant variant);

// Trains (or loads) the best-validation checkpoint of one variant.
Model trained_variant(const Corpus& corpus, const CodecConfig& codec, const Taxonomy& taxonomy,
                      const ExemptPairs& exempt, const AblationConfig& cfg, Variant variant,
                      const AblationCallbacks& callbacks = {}, AblationRow* row = nullptr);

// Mean and spread of the expert score over the generated scenes.
AblationRow summarize_scores(Variant variant, const std::vector<double>& scores, int failed);

AblationReport run_ablation(const Corpus& corpus, const CodecConfig& codec, const Taxonomy& taxonomy,
                            const ExemptPairs& exempt, const AblationConfig& cfg,
                            const AblationCallbacks& callbacks = {});

// Columns: variant, expert, scenes, failed, mean, stddev, ci_low, ci_high,
// best_epoch, best_val_loss.
std::string ablation_csv(const AblationReport& report);
// Bar chart of the means with confidence-interval whiskers.
std::string ablation_svg(const AblationReport& report);

}  // namespace layoutlab
