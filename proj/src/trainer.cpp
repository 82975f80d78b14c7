#include "layoutlab/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "layoutlab/error.hpp"
#include "layoutlab/generate.hpp"
#include "layoutlab/json_io.hpp"
#include "layoutlab/optim.hpp"

namespace layoutlab {

namespace {

ProbMatrix softmax_rows(const Model::Matrix& logits) {
  ProbMatrix p = logits.cast<double>();
  for (Eigen::Index r = 0; r < p.rows(); ++r) {
    p.row(r) = (p.row(r).array() - p.row(r).maxCoeff()).exp();
    p.row(r) /= p.row(r).sum();
  }
  return p;
}

std::span<const double> row_span(const ProbMatrix& m, Eigen::Index r) {
  return {m.data() + r * m.cols(), static_cast<std::size_t>(m.cols())};
}

}  // namespace

const char* variant_name(Variant v) {
  switch (v) {
    case Variant::kV0: return "V0";
    case Variant::kV1: return "V1";
    case Variant::kV2: return "V2";
    case Variant::kV3: return "V3";
  }
  return "?";
}

Variant variant_from_name(const std::string& name) {
  for (Variant v : {Variant::kV0, Variant::kV1, Variant::kV2, Variant::kV3})
    if (name == variant_name(v)) return v;
  throw InputError("unknown variant '" + name + "' (expected V0, V1, V2 or V3)");
}

LossWeights variant_weights(Variant v, double w) {
  switch (v) {
    case Variant::kV0: return {1.0, 0.0};
    case Variant::kV1: return {1.0 - w, 0.0};
    case Variant::kV2: return {1.0, 1.0};
    case Variant::kV3: return {1.0 - w, w};
  }
  return {1.0, 0.0};
}

const char* expert_name(ExpertKind k) { return k == ExpertKind::kErgonomic ? "ergonomic" : "intersection"; }

ExpertKind expert_from_name(const std::string& name) {
  if (name == "ergonomic" || name == "ergo") return ExpertKind::kErgonomic;
  if (name == "intersection") return ExpertKind::kIntersection;
  throw InputError("unknown expert '" + name + "' (expected ergonomic or intersection)");
}

double Expert::score(const Layout& layout) const {
  if (kind == ExpertKind::kErgonomic) return activity_costs(layout, *taxonomy, ergo).score;
  return scene_intersection_loss(layout, *exempt);
}

double Expert::weight(const Layout& layout) const {
  if (kind == ExpertKind::kErgonomic) return activity_costs(layout, *taxonomy, ergo).weight_score;
  return clamp_unit(scene_intersection_loss(layout, *exempt));
}

Dual Expert::along(const Layout& layout, int object, Attr attr) const {
  if (kind == ExpertKind::kErgonomic) return scene_score_along(layout, object, attr, *taxonomy, ergo);
  return scene_intersection_along(layout, object, attr, *exempt);
}

void TrainConfig::check() const {
  if (batch_size < 1 || epochs < 1 || augment_draws < 1) throw InputError("batch size, epochs and draws must be >= 1");
  if (!(lr > 0.0) || !(finetune_lr > 0.0)) throw InputError("learning rates must be positive");
  if (!(warmup_epochs >= 0.0)) throw InputError("warmup must be non-negative");
  if (!(window_sigma >= 0.0)) throw InputError("window sigma must be positive (or 0 for the default)");
  if (!(grad_clip > 0.0)) throw InputError("grad_clip must be positive");
  augment.check();
  ergo.check();
}

nlohmann::json TrainConfig::to_json() const {
  return {{"batch_size", batch_size},
          {"epochs", epochs},
          {"augment_draws", augment_draws},
          {"warmup_epochs", warmup_epochs},
          {"lr", lr},
          {"finetune_lr", finetune_lr},
          {"grad_clip", grad_clip},
          {"weight_decay", weight_decay},
          {"expert", expert_name(expert)},
          {"window_sigma", window_sigma},
          {"seed", seed},
          {"monitor_scenes", monitor_scenes},
          {"validation_expert", validation_expert},
          {"augment", augment.to_json()}};
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
  TrainConfig c;
  try {
    c.batch_size = j.value("batch_size", c.batch_size);
    c.epochs = j.value("epochs", c.epochs);
    c.augment_draws = j.value("augment_draws", c.augment_draws);
    c.warmup_epochs = j.value("warmup_epochs", c.warmup_epochs);
    c.lr = j.value("lr", c.lr);
    c.finetune_lr = j.value("finetune_lr", c.finetune_lr);
    c.grad_clip = j.value("grad_clip", c.grad_clip);
    c.weight_decay = j.value("weight_decay", c.weight_decay);
    if (j.contains("expert")) c.expert = expert_from_name(j["expert"].get<std::string>());
    c.window_sigma = j.value("window_sigma", c.window_sigma);
    c.seed = j.value("seed", c.seed);
    c.monitor_scenes = j.value("monitor_scenes", c.monitor_scenes);
    c.validation_expert = j.value("validation_expert", c.validation_expert);
    if (j.contains("augment")) c.augment = AugmentRules::from_json(j["augment"]);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("", std::string("train config: ") + e.what());
  }
  c.check();
  return c;
}

std::vector<SlotRef> geometric_slots(const Layout& layout, const Taxonomy& taxonomy) {
  std::vector<SlotRef> out;
  for (std::size_t i = 1; i < layout.objects.size(); ++i) {
    if (taxonomy.is_wall_element(layout.objects[i].category)) continue;
    for (int a = 0; a < kNumAttrs; ++a)
      out.push_back({static_cast<int>(kTupleSize * i) + 1 + a, static_cast<int>(i), static_cast<Attr>(a)});
  }
  return out;
}

std::vector<TrainingSample> build_samples(const std::vector<Layout>& layouts, int draws, const CodecConfig& codec,
                                          const Expert& expert, const AugmentRules& augment_rules, int* skipped) {
  const Taxonomy& tax = *expert.taxonomy;
  std::vector<TrainingSample> out;
  int skip = 0;
  for (std::size_t i = 0; i < layouts.size(); ++i) {
    for (int k = 0; k < draws; ++k) {
      const std::uint64_t seed = static_cast<std::uint64_t>(i) * static_cast<std::uint64_t>(draws) + static_cast<std::uint64_t>(k);
      const Layout ordered = canonical_order(augment(layouts[i], tax, augment_rules, seed), tax, seed);
      TrainingSample s;
      try {
        s.seq = encode(ordered, codec);
      } catch (const InputError&) {
        ++skip;
        break;
      }
      const std::size_t n = used_length(s.seq.tokens, codec);
      s.seq.tokens.resize(n);
      s.seq.positions.resize(n);
      s.seq.indices.resize(n);
      s.layout = decode(s.seq.tokens, codec);
      s.cell = decode_room(std::span<const int>(s.seq.tokens).first(kTupleSize), codec).cell;
      s.weight_score = expert.weight(s.layout);
      s.slots = geometric_slots(s.layout, tax);
      s.source_id = layouts[i].source_id;
      s.draw = k;
      out.push_back(std::move(s));
    }
  }
  if (skipped) *skipped = skip;
  return out;
}

double cross_entropy_loss(const ProbMatrix& probs, std::span<const int> targets, std::span<const char> mask,
                          ProbMatrix* dlogits) {
  if (targets.size() != static_cast<std::size_t>(probs.rows()) || mask.size() != targets.size())
    throw InputError("cross_entropy_loss: probabilities, targets and mask disagree in length");
  std::size_t count = 0;
  for (char m : mask) count += m ? 1 : 0;
  if (dlogits) dlogits->setZero(probs.rows(), probs.cols());
  if (count == 0) return 0.0;
  double loss = 0.0;
  const double inv = 1.0 / static_cast<double>(count);
  for (Eigen::Index r = 0; r < probs.rows(); ++r) {
    if (!mask[static_cast<std::size_t>(r)]) continue;
    const int t = targets[static_cast<std::size_t>(r)];
    if (t < 0 || t >= probs.cols()) throw InputError("target token out of range");
    loss -= std::log(std::max(probs(r, t), 1e-300));
    if (dlogits) {
      dlogits->row(r) = probs.row(r) * inv;
      (*dlogits)(r, t) -= inv;
    }
  }
  return loss * inv;
}

WindowExpectation window_expectation(std::span<const double> probs, double sigma, int support) {
  if (!(sigma > 0.0)) throw InputError("window sigma must be positive");
  const std::size_t n = support > 0 ? std::min(probs.size(), static_cast<std::size_t>(support)) : probs.size();
  if (n == 0) throw InputError("empty probability vector");
  WindowExpectation out;
  out.mode = static_cast<int>(std::max_element(probs.begin(), probs.begin() + static_cast<std::ptrdiff_t>(n)) - probs.begin());
  std::vector<double> w(n);
  double num = 0.0, den = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double z = (static_cast<double>(j) - out.mode) / sigma;
    w[j] = std::exp(-0.5 * z * z);
    num += w[j] * probs[j] * static_cast<double>(j);
    den += w[j] * probs[j];
  }
  out.grad.assign(probs.size(), 0.0);
  if (!(den > 0.0)) {
    out.value = out.mode;
    return out;
  }
  out.value = num / den;
  for (std::size_t j = 0; j < n; ++j) out.grad[j] = w[j] * (static_cast<double>(j) - out.value) / den;
  return out;
}

ExpertTokenLoss expert_token_loss(const TrainingSample& sample, int offset, std::span<const double> probs,
                                  const Expert& expert, double sigma, int resolution) {
  ExpertTokenLoss out;
  const auto it = std::find_if(sample.slots.begin(), sample.slots.end(), [&](const SlotRef& s) { return s.offset == offset; });
  if (it == sample.slots.end()) return out;
  const WindowExpectation we = window_expectation(probs, sigma, resolution);
  Layout scene = sample.layout;
  scene.objects[static_cast<std::size_t>(it->object)].attr(it->attr) =
      dequantize_attribute(it->attr, we.value, sample.cell, resolution);
  const Dual e = expert.along(scene, it->object, it->attr);
  const double chain = e.d * dequantize_slope(it->attr, sample.cell, resolution);
  out.applied = true;
  out.value = e.v;
  out.dprobs.resize(probs.size());
  for (std::size_t j = 0; j < probs.size(); ++j) out.dprobs[j] = chain * we.grad[j];
  return out;
}

std::vector<double> probs_to_logits_grad(std::span<const double> probs, std::span<const double> dprobs) {
  double dot = 0.0;
  for (std::size_t j = 0; j < probs.size(); ++j) dot += probs[j] * dprobs[j];
  std::vector<double> out(probs.size());
  for (std::size_t j = 0; j < probs.size(); ++j) out[j] = probs[j] * (dprobs[j] - dot);
  return out;
}

SampleLoss sample_loss(const Model& model, const TrainingSample& sample, Variant variant, const Expert& expert,
                       double sigma, Model::Activations& acts, std::mt19937_64* dropout_rng, Model::Matrix* dlogits,
                       bool force_expert) {
  const std::size_t n = sample.seq.size();
  if (n < 2) throw InputError("training sample shorter than two tokens");
  const std::span<const int> toks(sample.seq.tokens), pos(sample.seq.positions), idx(sample.seq.indices);
  model.forward(toks.first(n - 1), pos.first(n - 1), idx.first(n - 1), acts, dropout_rng);
  const ProbMatrix probs = softmax_rows(acts.logits);
  const std::vector<char> mask(n - 1, 1);

  SampleLoss out;
  out.weights = variant_weights(variant, sample.weight_score);
  ProbMatrix dce;
  out.text = cross_entropy_loss(probs, toks.subspan(1), mask, dlogits ? &dce : nullptr);

  ProbMatrix dexp;
  const bool use_expert = out.weights.expert > 0.0 || force_expert;
  if (use_expert && !sample.slots.empty()) {
    if (dlogits) dexp.setZero(probs.rows(), probs.cols());
    const double inv = 1.0 / static_cast<double>(sample.slots.size());
    const int r = model.config().vocab - 2;
    for (const SlotRef& s : sample.slots) {
      const Eigen::Index row = s.offset - 1;
      const auto p = row_span(probs, row);
      const ExpertTokenLoss e = expert_token_loss(sample, s.offset, p, expert, sigma, r);
      out.expert += e.value * inv;
      if (dlogits && out.weights.expert > 0.0) {
        const std::vector<double> g = probs_to_logits_grad(p, e.dprobs);
        for (std::size_t j = 0; j < g.size(); ++j) dexp(row, static_cast<Eigen::Index>(j)) += g[j] * inv;
      }
    }
  }
  out.total = out.weights.text * out.text + out.weights.expert * out.expert;
  if (dlogits) {
    ProbMatrix d = out.weights.text * dce;
    if (dexp.size() > 0 && out.weights.expert > 0.0) d += out.weights.expert * dexp;
    *dlogits = d.cast<float>();
  }
  return out;
}

double lr_at(std::int64_t step, const Schedule& s) {
  if (step < 0) throw InputError("step must be non-negative");
  if (step >= s.total_steps) return 0.0;
  if (step < s.warmup_steps) return s.base * static_cast<double>(step) / static_cast<double>(s.warmup_steps);
  const double span = static_cast<double>(s.total_steps - s.warmup_steps);
  return s.base * static_cast<double>(s.total_steps - step) / span;
}

std::pair<double, double> evaluate_samples(const Model& model, const std::vector<TrainingSample>& samples,
                                           const Expert& expert, double sigma, bool with_expert) {
  if (samples.empty()) return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
  Model::Activations acts;
  double ce = 0.0, ex = 0.0;
  for (const TrainingSample& s : samples) {
    const SampleLoss l = sample_loss(model, s, Variant::kV0, expert, sigma, acts, nullptr, nullptr, with_expert);
    ce += l.text;
    ex += l.expert;
  }
  const double n = static_cast<double>(samples.size());
  return {ce / n, with_expert ? ex / n : std::numeric_limits<double>::quiet_NaN()};
}

void attach_metadata(Model& model, const CodecConfig& codec, const Taxonomy& taxonomy) {
  model.metadata()["codec"] = codec_to_json(codec);
  model.metadata()["taxonomy"] = taxonomy.to_json();
}

CodecConfig codec_of(const Model& model) {
  if (!model.metadata().contains("codec")) throw ParseError("/meta/codec", "checkpoint carries no codec settings");
  return codec_from_json(model.metadata()["codec"]);
}

TrainResult train_from(Model model, const Corpus& corpus, const CodecConfig& codec, const Taxonomy& taxonomy,
                       const ExemptPairs& exempt, const TrainConfig& cfg, Variant variant,
                       const TrainCallbacks& callbacks) {
  cfg.check();
  codec.check();
  if (model.config().vocab != codec.vocab_size()) throw InputError("model vocabulary does not match the codec");
  if (model.config().context < codec.sequence_length()) throw InputError("model context shorter than the codec sequence");
  const Expert expert{cfg.expert, &taxonomy, &exempt, cfg.ergo};
  TrainResult res;
  const std::vector<TrainingSample> train_set =
      build_samples(corpus.train, cfg.augment_draws, codec, expert, cfg.augment, &res.skipped_train);
  const std::vector<TrainingSample> val_set =
      build_samples(corpus.validation, 1, codec, expert, cfg.augment, &res.skipped_validation);
  if (train_set.empty()) throw InputError("training corpus is empty");

  attach_metadata(model, codec, taxonomy);
  model.metadata()["variant"] = variant_name(variant);
  model.metadata()["expert"] = expert_name(cfg.expert);

  const std::size_t N = train_set.size();
  const std::size_t B = static_cast<std::size_t>(cfg.batch_size);
  const std::int64_t steps_per_epoch = static_cast<std::int64_t>((N + B - 1) / B);
  const Schedule sched{cfg.lr, std::llround(cfg.warmup_epochs * static_cast<double>(steps_per_epoch)),
                       steps_per_epoch * cfg.epochs};
  const double sigma = cfg.sigma(codec.resolution);

  Adam adam(model.num_parameters(), {0.9, 0.999, 1e-8, cfg.weight_decay});
  std::mt19937_64 order_rng(cfg.seed);
  std::mt19937_64 drop_rng(cfg.seed ^ 0xd1b54a32d192ed03ull);
  std::vector<std::size_t> order(N);
  std::iota(order.begin(), order.end(), 0);
  Model::Activations acts;
  Model::Matrix dlogits;
  std::int64_t step = 0;
  double best_val = std::numeric_limits<double>::infinity();

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    std::shuffle(order.begin(), order.end(), order_rng);
    EpochMetrics m;
    m.epoch = epoch;
    for (std::size_t b0 = 0; b0 < N; b0 += B) {
      const std::size_t b1 = std::min(N, b0 + B);
      const float scale = 1.0f / static_cast<float>(b1 - b0);
      model.zero_grad();
      for (std::size_t k = b0; k < b1; ++k) {
        const TrainingSample& s = train_set[order[k]];
        const SampleLoss l = sample_loss(model, s, variant, expert, sigma, acts, &drop_rng, &dlogits);
        if (!std::isfinite(l.total))
          throw DivergenceError(fmt::format("non-finite loss at epoch {} step {} (scene {}, draw {})", epoch, step,
                                            s.source_id, s.draw));
        m.train_loss += l.total;
        m.train_text += l.text;
        m.train_expert += l.expert;
        dlogits *= scale;
        model.backward(acts, dlogits);
        ++res.sample_visits;
      }
      const double gn = clip_grad_norm(model.gradients(), cfg.grad_clip);
      if (!std::isfinite(gn))
        throw DivergenceError(fmt::format("non-finite gradient norm at epoch {} step {}", epoch, step));
      m.lr = lr_at(step, sched);
      adam.step(model.parameters(), model.gradients(), m.lr);
      ++step;
    }
    m.train_loss /= static_cast<double>(N);
    m.train_text /= static_cast<double>(N);
    m.train_expert /= static_cast<double>(N);
    std::tie(m.val_loss, m.val_expert_loss) = evaluate_samples(model, val_set, expert, sigma, cfg.validation_expert);
    if (cfg.monitor_scenes > 0) {
      SamplerConfig sc;
      sc.collision_checks = false;
      const GenerationContext ctx{model, codec, taxonomy, exempt};
      const auto scenes = generate_many(ctx, sc, cfg.monitor_scenes, cfg.seed + static_cast<std::uint64_t>(epoch), 1);
      double sum = 0.0;
      for (const auto& g : scenes) sum += expert.score(g.layout);
      m.mean_expert_score = sum / static_cast<double>(scenes.size());
    }
    m.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    res.history.push_back(m);
    if (callbacks.on_epoch) callbacks.on_epoch(m);
    const double key = std::isfinite(m.val_loss) ? m.val_loss : -static_cast<double>(epoch);
    if (key < best_val) {
      best_val = key;
      res.best_epoch = epoch;
      res.best.emplace(model);
    }
  }
  res.last.emplace(std::move(model));
  return res;
}

TrainResult train(const Corpus& corpus, const CodecConfig& codec, const Taxonomy& taxonomy, const ExemptPairs& exempt,
                  const ModelConfig& model_cfg, const TrainConfig& cfg, Variant variant,
                  const TrainCallbacks& callbacks) {
  return train_from(Model(model_cfg), corpus, codec, taxonomy, exempt, cfg, variant, callbacks);
}

TrainResult fine_tune(const Model& base, const Corpus& corpus, const CodecConfig& codec, const Taxonomy& taxonomy,
                      const ExemptPairs& exempt, const TrainConfig& cfg, Variant variant,
                      const TrainCallbacks& callbacks) {
  TrainConfig ft = cfg;
  ft.lr = cfg.finetune_lr;
  return train_from(base, corpus, codec, taxonomy, exempt, ft, variant, callbacks);
}

void write_metrics_csv(const std::string& path, const std::vector<EpochMetrics>& history) {
  std::string out = "epoch,train_loss,val_loss,mean_expert_score,val_expert_loss,lr\n";
  for (const EpochMetrics& m : history)
    out += fmt::format("{},{:.8g},{:.8g},{:.8g},{:.8g},{:.8g}\n", m.epoch, m.train_loss, m.val_loss,
                       m.mean_expert_score, m.val_expert_loss, m.lr);
  write_text_file(path, out);
}

}  // namespace layoutlab
