#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "layoutlab/codec.hpp"
#include "layoutlab/data.hpp"
#include "layoutlab/ergo.hpp"
#include "layoutlab/geom.hpp"
#include "layoutlab/model.hpp"

namespace layoutlab {

enum class Variant { kV0 = 0, kV1 = 1, kV2 = 2, kV3 = 3 };
const char* variant_name(Variant v);
Variant variant_from_name(const std::string& name);  // "V0".."V3"

struct LossWeights {
  double text = 1.0;    // beta_T
  double expert = 0.0;  // beta_E
};
// (1,0), (1-w,0), (1,1), (1-w,w) for V0..V3, w the per-sample weight score.
LossWeights variant_weights(Variant v, double weight_score);

enum class ExpertKind { kErgonomic, kIntersection };
const char* expert_name(ExpertKind k);
ExpertKind expert_from_name(const std::string& name);

// The scene-level expert used as auxiliary loss and sample weight.
struct Expert {
  ExpertKind kind = ExpertKind::kErgonomic;
  const Taxonomy* taxonomy = nullptr;
  const ExemptPairs* exempt = nullptr;
  ErgoParams ergo;

  // Scaled ergonomic score E, or the intersection loss.
  double score(const Layout& layout) const;
  // Unscaled ergonomic score, or the intersection loss clamped to [0, 1].
  double weight(const Layout& layout) const;
  Dual along(const Layout& layout, int object, Attr attr) const;
};

struct TrainConfig {
  int batch_size = 32;
  int epochs = 10;
  int augment_draws = 8;  // augmentation variations per training scene
  double warmup_epochs = 1.0;
  double lr = 5e-5;
  double finetune_lr = 2e-5;
  double grad_clip = 1.0;
  double weight_decay = 0.0;
  ExpertKind expert = ExpertKind::kErgonomic;
  double window_sigma = 0.0;  // 0 selects resolution / 32
  std::uint64_t seed = 0;
  int monitor_scenes = 0;  // scenes sampled after each epoch for mean_expert_score
  bool validation_expert = true;
  AugmentRules augment;
  ErgoParams ergo;

  void check() const;
  nlohmann::json to_json() const;
  static TrainConfig from_json(const nlohmann::json& j);
  double sigma(int resolution) const { return window_sigma > 0.0 ? window_sigma : resolution / 32.0; }
};

// A geometric attribute slot of a furniture object inside a sequence.
struct SlotRef {
  int offset = 0;  // token offset in the sequence
  int object = 0;  // index into the decoded layout
  Attr attr = Attr::kX;
};

// One teacher-forcing example: the encoded (truncated) sequence and the
// decoded ground truth it describes.
struct TrainingSample {
  TokenSequence seq;
  Layout layout;
  double cell = 0.0;
  double weight_score = 0.0;
  std::vector<SlotRef> slots;
  std::string source_id;
  int draw = 0;
};

// Geometric slots (o, w, d, x, y) of furniture that is not a door or window.
std::vector<SlotRef> geometric_slots(const Layout& layout, const Taxonomy& taxonomy);

// Augments, orders, encodes and decodes `draws` variations of each layout.
// Layouts the codec cannot encode (room outside the bounds) are skipped.
std::vector<TrainingSample> build_samples(const std::vector<Layout>& layouts, int draws, const CodecConfig& codec,
                                          const Expert& expert, const AugmentRules& augment, int* skipped = nullptr);

using ProbMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Mean negative log-probability of the targets over rows where mask is true.
// When `dlogits` is given it receives the gradient with respect to the logits
// (probabilities minus one-hot, divided by the count).
double cross_entropy_loss(const ProbMatrix& probs, std::span<const int> targets, std::span<const char> mask,
                          ProbMatrix* dlogits = nullptr);

struct WindowExpectation {
  double value = 0.0;        // v-bar
  int mode = 0;              // v-hat
  std::vector<double> grad;  // d v-bar / d P_j
};
// Gaussian-weighted mean of token values around the argmax, over values
// 0..support-1 (support 0 means every entry).
WindowExpectation window_expectation(std::span<const double> probs, double sigma, int support = 0);

struct ExpertTokenLoss {
  bool applied = false;
  double value = 0.0;
  std::vector<double> dprobs;  // dLoss/dP, same length as probs
};
// Expert score of the ground truth with slot `offset` replaced by the window
// expectation of `probs`. Non-geometric slots are skipped.
ExpertTokenLoss expert_token_loss(const TrainingSample& sample, int offset, std::span<const double> probs,
                                  const Expert& expert, double sigma, int resolution);

// Row-wise softmax Jacobian applied to dLoss/dP.
std::vector<double> probs_to_logits_grad(std::span<const double> probs, std::span<const double> dprobs);

struct SampleLoss {
  double text = 0.0;    // L_T
  double expert = 0.0;  // L_E (0 unless evaluated)
  LossWeights weights;
  double total = 0.0;
};

// Forward pass plus the variant's loss. With `dlogits` the gradient of the
// total is written there (one row per predicted token).
SampleLoss sample_loss(const Model& model, const TrainingSample& sample, Variant variant, const Expert& expert,
                       double sigma, Model::Activations& acts, std::mt19937_64* dropout_rng,
                       Model::Matrix* dlogits, bool force_expert = false);

struct Schedule {
  double base = 5e-5;
  std::int64_t warmup_steps = 0;
  std::int64_t total_steps = 1;
};
// Linear warmup 0 -> base, then linear decay base -> 0 at total_steps.
double lr_at(std::int64_t step, const Schedule& s);

struct EpochMetrics {
  int epoch = 0;
  double train_loss = 0.0;
  double train_text = 0.0;
  double train_expert = 0.0;
  double val_loss = 0.0;         // mean cross-entropy on validation
  double val_expert_loss = 0.0;  // mean L_E on validation
  double mean_expert_score = std::numeric_limits<double>::quiet_NaN();
  double lr = 0.0;
  double seconds = 0.0;
};

struct TrainResult {
  std::vector<EpochMetrics> history;
  int best_epoch = 0;  // 1-based
  std::optional<Model> best;
  std::optional<Model> last;
  std::int64_t sample_visits = 0;
  int skipped_train = 0;
  int skipped_validation = 0;
};

struct TrainCallbacks {
  std::function<void(const EpochMetrics&)> on_epoch;
};

// Full training run from a freshly initialized model.
TrainResult train(const Corpus& corpus, const CodecConfig& codec, const Taxonomy& taxonomy, const ExemptPairs& exempt,
                  const ModelConfig& model_cfg, const TrainConfig& cfg, Variant variant,
                  const TrainCallbacks& callbacks = {});

// Continues from `init` at cfg.lr.
TrainResult train_from(Model init, const Corpus& corpus, const CodecConfig& codec, const Taxonomy& taxonomy,
                       const ExemptPairs& exempt, const TrainConfig& cfg, Variant variant,
                       const TrainCallbacks& callbacks = {});

// Transfer learning: continues from `base` at cfg.finetune_lr.
TrainResult fine_tune(const Model& base, const Corpus& corpus, const CodecConfig& codec, const Taxonomy& taxonomy,
                      const ExemptPairs& exempt, const TrainConfig& cfg, Variant variant,
                      const TrainCallbacks& callbacks = {});

// Mean cross-entropy and mean expert loss over `samples` (no dropout).
std::pair<double, double> evaluate_samples(const Model& model, const std::vector<TrainingSample>& samples,
                                           const Expert& expert, double sigma, bool with_expert);

// Columns: epoch, train_loss, val_loss, mean_expert_score, val_expert_loss, lr.
void write_metrics_csv(const std::string& path, const std::vector<EpochMetrics>& history);

// Codec and taxonomy stored alongside the weights.
void attach_metadata(Model& model, const CodecConfig& codec, const Taxonomy& taxonomy);
CodecConfig codec_of(const Model& model);

}  // namespace layoutlab
