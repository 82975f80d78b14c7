#include "layoutlab/ablation.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include <fmt/format.h>

#include "layoutlab/json_io.hpp"

namespace layoutlab {

namespace fs = std::filesystem;

nlohmann::json AblationConfig::to_json() const {
  nlohmann::json vs = nlohmann::json::array();
  for (Variant v : variants) vs.push_back(variant_name(v));
  return {{"model", model.to_json()},   {"train", train.to_json()}, {"sampler", sampler.to_json()},
          {"scenes", scenes},           {"variants", vs}};
}

const AblationRow* AblationReport::find(Variant v) const {
  for (const AblationRow& r : rows)
    if (r.variant == v) return &r;
  return nullptr;
}

std::string checkpoint_key(const Corpus& corpus, const CodecConfig& codec, const Taxonomy& taxonomy,
                           const ModelConfig& model, const TrainConfig& train, Variant variant) {
  nlohmann::json t = train.to_json();
  t.erase("monitor_scenes");
  t.erase("validation_expert");
  if (variant == Variant::kV0) t.erase("expert");
  const nlohmann::json key = {{"corpus", export_corpus(corpus, taxonomy)},
                              {"codec", codec_to_json(codec)},
                              {"model", model.to_json()},
                              {"train", t},
                              {"variant", variant_name(variant)}};
  return fnv1a_hex(key.dump());
}

Model trained_variant(const Corpus& corpus, const CodecConfig& codec, const Taxonomy& taxonomy,
                      const ExemptPairs& exempt, const AblationConfig& cfg, Variant variant,
                      const AblationCallbacks& callbacks, AblationRow* row) {
  fs::path cached;
  if (!cfg.cache_dir.empty()) {
    fs::create_directories(cfg.cache_dir);
    cached = fs::path(cfg.cache_dir) /
             fmt::format("{}-{}.ckpt", variant_name(variant),
                         checkpoint_key(corpus, codec, taxonomy, cfg.model, cfg.train, variant));
    if (fs::exists(cached)) {
      Model m = Model::load(cached.string());
      if (row) {
        row->cached = true;
        row->best_epoch = m.metadata().value("best_epoch", 0);
        row->best_val_loss = m.metadata().value("best_val_loss", 0.0);
      }
      return m;
    }
  }
  TrainCallbacks tcb;
  if (callbacks.on_epoch) tcb.on_epoch = [&](const EpochMetrics& m) { callbacks.on_epoch(variant, m); };
  TrainResult res = train(corpus, codec, taxonomy, exempt, cfg.model, cfg.train, variant, tcb);
  Model best = std::move(*res.best);
  const double best_val = res.history[static_cast<std::size_t>(res.best_epoch - 1)].val_loss;
  best.metadata()["best_epoch"] = res.best_epoch;
  best.metadata()["best_val_loss"] = best_val;
  if (row) {
    row->best_epoch = res.best_epoch;
    row->best_val_loss = best_val;
  }
  if (!cached.empty()) {
    const fs::path tmp = cached.string() + ".tmp";
    best.save(tmp.string());
    fs::rename(tmp, cached);
  }
  return best;
}

AblationRow summarize_scores(Variant variant, const std::vector<double>& scores, int failed) {
  AblationRow r;
  r.variant = variant;
  r.failed = failed;
  r.scenes = static_cast<int>(scores.size());
  if (scores.empty()) {
    r.mean = r.stddev = r.ci_low = r.ci_high = std::numeric_limits<double>::quiet_NaN();
    return r;
  }
  double sum = 0.0;
  for (double s : scores) sum += s;
  r.mean = sum / static_cast<double>(scores.size());
  double ss = 0.0;
  for (double s : scores) ss += (s - r.mean) * (s - r.mean);
  r.stddev = scores.size() > 1 ? std::sqrt(ss / static_cast<double>(scores.size() - 1)) : 0.0;
  const double half = 1.96 * r.stddev / std::sqrt(static_cast<double>(scores.size()));
  r.ci_low = r.mean - half;
  r.ci_high = r.mean + half;
  return r;
}

AblationReport run_ablation(const Corpus& corpus, const CodecConfig& codec, const Taxonomy& taxonomy,
                            const ExemptPairs& exempt, const AblationConfig& cfg,
                            const AblationCallbacks& callbacks) {
  AblationReport report;
  report.expert = cfg.train.expert;
  const Expert expert{cfg.train.expert, &taxonomy, &exempt, cfg.train.ergo};
  for (Variant v : cfg.variants) {
    AblationRow meta;
    const Model model = trained_variant(corpus, codec, taxonomy, exempt, cfg, v, callbacks, &meta);
    const GenerationContext ctx{model, codec, taxonomy, exempt};
    const auto scenes = generate_many(ctx, cfg.sampler, cfg.scenes, cfg.train.seed, cfg.threads);
    std::vector<double> scores;
    int failed = 0;
    for (const GeneratedScene& g : scenes) {
      if (g.failed) {
        ++failed;
        continue;
      }
      scores.push_back(expert.score(g.layout));
    }
    AblationRow row = summarize_scores(v, scores, failed);
    row.best_epoch = meta.best_epoch;
    row.best_val_loss = meta.best_val_loss;
    row.cached = meta.cached;
    report.rows.push_back(row);
    if (callbacks.on_variant) callbacks.on_variant(row);
  }
  return report;
}

std::string ablation_csv(const AblationReport& report) {
  std::string out = "variant,expert,scenes,failed,mean,stddev,ci_low,ci_high,best_epoch,best_val_loss\n";
  for (const AblationRow& r : report.rows)
    out += fmt::format("{},{},{},{},{:.6f},{:.6f},{:.6f},{:.6f},{},{:.6f}\n", variant_name(r.variant),
                       expert_name(report.expert), r.scenes, r.failed, r.mean, r.stddev, r.ci_low, r.ci_high,
                       r.best_epoch, r.best_val_loss);
  return out;
}

std::string ablation_svg(const AblationReport& report) {
  constexpr double kWidth = 480, kHeight = 320, kLeft = 60, kBottom = 40, kTop = 30, kBar = 60;
  double top = 0.0;
  for (const AblationRow& r : report.rows)
    if (std::isfinite(r.ci_high)) top = std::max(top, r.ci_high);
  if (top <= 0.0) top = 1.0;
  top *= 1.1;
  const double plot_h = kHeight - kBottom - kTop;
  auto y_of = [&](double v) { return kHeight - kBottom - v / top * plot_h; };
  std::string out = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0f}\" height=\"{:.0f}\" viewBox=\"0 0 {:.0f} {:.0f}\">\n"
      "<rect x=\"0\" y=\"0\" width=\"{:.0f}\" height=\"{:.0f}\" fill=\"white\"/>\n",
      kWidth, kHeight, kWidth, kHeight, kWidth, kHeight);
  out += fmt::format("<text x=\"{:.1f}\" y=\"18\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\">"
                     "mean {} score of generated scenes</text>\n",
                     kWidth / 2, expert_name(report.expert));
  out += fmt::format("<line x1=\"{0:.1f}\" y1=\"{1:.1f}\" x2=\"{0:.1f}\" y2=\"{2:.1f}\" stroke=\"black\"/>\n", kLeft,
                     y_of(0), y_of(top));
  out += fmt::format("<line x1=\"{:.1f}\" y1=\"{:.1f}\" x2=\"{:.1f}\" y2=\"{:.1f}\" stroke=\"black\"/>\n", kLeft,
                     y_of(0), kWidth - 10, y_of(0));
  for (int k = 0; k <= 4; ++k) {
    const double v = top * k / 4.0;
    out += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" font-family=\"sans-serif\" font-size=\"10\" "
                       "text-anchor=\"end\">{:.3f}</text>\n",
                       kLeft - 4, y_of(v) + 3, v);
  }
  const double slot = (kWidth - kLeft - 10) / std::max<std::size_t>(1, report.rows.size());
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    const AblationRow& r = report.rows[i];
    const double cx = kLeft + slot * (static_cast<double>(i) + 0.5);
    const double mean = std::isfinite(r.mean) ? r.mean : 0.0;
    out += fmt::format("<rect x=\"{:.1f}\" y=\"{:.1f}\" width=\"{:.1f}\" height=\"{:.1f}\" fill=\"#4c72b0\"/>\n",
                       cx - kBar / 2, y_of(mean), kBar, y_of(0) - y_of(mean));
    if (std::isfinite(r.ci_low)) {
      out += fmt::format("<line x1=\"{0:.1f}\" y1=\"{1:.1f}\" x2=\"{0:.1f}\" y2=\"{2:.1f}\" stroke=\"black\"/>\n", cx,
                         y_of(std::max(0.0, r.ci_low)), y_of(r.ci_high));
      for (double v : {std::max(0.0, r.ci_low), r.ci_high})
        out += fmt::format("<line x1=\"{:.1f}\" y1=\"{:.1f}\" x2=\"{:.1f}\" y2=\"{:.1f}\" stroke=\"black\"/>\n",
                           cx - 8, y_of(v), cx + 8, y_of(v));
    }
    out += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" font-family=\"sans-serif\" font-size=\"12\" "
                       "text-anchor=\"middle\">{}</text>\n",
                       cx, y_of(0) + 16, variant_name(r.variant));
  }
  out += "</svg>\n";
  return out;
}

}  // namespace layoutlab
