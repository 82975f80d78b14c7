// layoutlab command-line tool: preprocess, synth-corpus, train, finetune,
// generate, score, ablate, render. Every command writes manifest.json into its
// output directory.

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "layoutlab/ablation.hpp"
#include "layoutlab/data.hpp"
#include "layoutlab/error.hpp"
#include "layoutlab/generate.hpp"
#include "layoutlab/json_io.hpp"
#include "layoutlab/postprocess.hpp"
#include "layoutlab/svg.hpp"
#include "layoutlab/synth_corpus.hpp"
#include "layoutlab/trainer.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace layoutlab;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kDataError = 2, kDivergence = 3 };

struct Common {
  std::string out;
  std::optional<std::string> config;
  std::optional<std::string> taxonomy;
  std::optional<std::string> exempt;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("-o,--out", c.out, "Output directory")->required();
  sub->add_option("--config", c.config, "JSON config file (flags take precedence)");
  sub->add_option("--taxonomy", c.taxonomy, "Category taxonomy JSON");
  sub->add_option("--exempt", c.exempt, "Exempt category pairs JSON");
  sub->add_option("--seed", c.seed, "Random seed");
}

class Manifest {
 public:
  Manifest(std::string command, const std::string& dir)
      : command_(std::move(command)), dir_(dir), start_(std::chrono::steady_clock::now()), wall_(std::time(nullptr)) {
    fs::create_directories(dir_);
  }
  void input(const std::string& p) { inputs_.push_back(p); }
  void output(const std::string& name) { outputs_.push_back((dir_ / name).string()); }
  void set_config(json c) { config_ = std::move(c); }
  void set_seed(std::uint64_t s) { seed_ = s; }
  void phase(const std::string& name, double seconds) { phases_[name] = seconds; }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  void write(const std::string& status) const {
    char started[32];
    std::strftime(started, sizeof started, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&wall_));
    const json doc = {
        {"command", command_},
        {"status", status},
        {"version", std::string("layoutlab ") + LAYOUTLAB_VERSION},
        {"config", config_},
        {"config_hash", fnv1a_hex(config_.dump())},
        {"seed", seed_},
        {"inputs", inputs_},
        {"outputs", outputs_},
        {"timings",
         {{"started", started},
          {"seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count()},
          {"phases", phases_}}}};
    write_json_file((dir_ / "manifest.json").string(), doc);
  }

 private:
  std::string command_;
  fs::path dir_;
  std::chrono::steady_clock::time_point start_;
  std::time_t wall_;
  json config_ = json::object();
  std::uint64_t seed_ = 0;
  std::vector<std::string> inputs_, outputs_;
  json phases_ = json::object();
};

class Stopwatch {
 public:
  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - t_).count();
    t_ = now;
    return s;
  }

 private:
  std::chrono::steady_clock::time_point t_ = std::chrono::steady_clock::now();
};

json config_section(const Common& c, const char* name) {
  if (!c.config) return json::object();
  const json doc = read_json_file(*c.config);
  if (!doc.is_object()) throw ParseError(*c.config, "config must be a JSON object");
  return doc.contains(name) ? doc[name] : json::object();
}

Taxonomy load_taxonomy(const Common& c, const Model* model = nullptr) {
  if (c.taxonomy) return Taxonomy::load(*c.taxonomy);
  if (model && model->metadata().contains("taxonomy")) return Taxonomy::from_json(model->metadata()["taxonomy"]);
  return Taxonomy::builtin();
}

ExemptPairs load_exempt(const Common& c, const Taxonomy& tax) {
  return c.exempt ? ExemptPairs::load(*c.exempt) : ExemptPairs::defaults(tax);
}

template <class T>
void override(T& field, const std::optional<T>& flag) {
  if (flag) field = *flag;
}

// Flags shared by train, finetune and ablate.
struct TrainFlags {
  std::optional<int> epochs, batch, draws, monitor;
  std::optional<double> lr, finetune_lr, warmup, sigma;
  std::optional<std::string> expert, profile;

  void add(CLI::App* sub) {
    sub->add_option("--epochs", epochs, "Training epochs");
    sub->add_option("--batch", batch, "Batch size");
    sub->add_option("--draws", draws, "Augmentation draws per scene");
    sub->add_option("--lr", lr, "Base learning rate");
    sub->add_option("--finetune-lr", finetune_lr, "Fine-tuning learning rate");
    sub->add_option("--warmup", warmup, "Warm-up epochs");
    sub->add_option("--sigma", sigma, "Gaussian window width in tokens (0 = resolution/32)");
    sub->add_option("--expert", expert, "Expert loss: ergonomic | intersection");
    sub->add_option("--monitor", monitor, "Scenes sampled per epoch for the expert-score log");
    sub->add_option("--profile", profile, "Model size: desk | paper")->check(CLI::IsMember({"desk", "paper"}));
  }

  TrainConfig train_config(const Common& c) const {
    TrainConfig t = TrainConfig::from_json(config_section(c, "train"));
    override(t.epochs, epochs);
    override(t.batch_size, batch);
    override(t.augment_draws, draws);
    override(t.lr, lr);
    override(t.finetune_lr, finetune_lr);
    override(t.warmup_epochs, warmup);
    override(t.window_sigma, sigma);
    override(t.monitor_scenes, monitor);
    if (expert) t.expert = expert_from_name(*expert);
    override(t.seed, c.seed);
    t.check();
    return t;
  }

  ModelConfig model_config(const Common& c) const {
    const json section = config_section(c, "model");
    ModelConfig m = profile && *profile == "paper" ? ModelConfig::paper() : ModelConfig::desk();
    if (!section.empty()) {
      json merged = m.to_json();
      merged.update(section);
      m = ModelConfig::from_json(merged);
    }
    if (c.seed) m.seed = *c.seed;
    m.check();
    return m;
  }
};

struct SamplerFlags {
  std::optional<double> top_p, area_ratio;
  std::optional<int> resample_limit, restart_budget;
  bool no_checks = false;

  void add(CLI::App* sub) {
    sub->add_option("--top-p", top_p, "Nucleus mass");
    sub->add_option("--area-ratio", area_ratio, "Collision overlap threshold");
    sub->add_option("--resample-limit", resample_limit, "Attempts per object");
    sub->add_option("--restart-budget", restart_budget, "Scene restarts before failing");
    sub->add_flag("--no-collision-checks", no_checks, "Disable inference-time collision checks");
  }

  SamplerConfig sampler_config(const Common& c) const {
    SamplerConfig s = SamplerConfig::from_json(config_section(c, "sampler"));
    override(s.top_p, top_p);
    override(s.area_ratio_threshold, area_ratio);
    override(s.resample_limit, resample_limit);
    override(s.restart_budget, restart_budget);
    if (no_checks) s.collision_checks = false;
    s.check();
    return s;
  }
};

void log_epoch(const std::string& tag, const EpochMetrics& m) {
  fmt::print(stderr, "{}epoch {:>2}  train {:.4f}  val {:.4f}  val_expert {:.4f}  lr {:.2e}  {:.1f}s\n", tag, m.epoch,
             m.train_loss, m.val_loss, m.val_expert_loss, m.lr, m.seconds);
}

Corpus load_corpus(const std::string& path, const Taxonomy& tax) { return import_corpus_file(path, tax); }

void write_training_outputs(Manifest& man, TrainResult& res) {
  res.best->metadata()["best_epoch"] = res.best_epoch;
  res.best->save(man.path("best.ckpt"));
  res.last->save(man.path("last.ckpt"));
  write_metrics_csv(man.path("metrics.csv"), res.history);
  man.output("best.ckpt");
  man.output("last.ckpt");
  man.output("metrics.csv");
  fmt::print(stderr, "best epoch {} ({} sample visits, {} scenes skipped)\n", res.best_epoch, res.sample_visits,
             res.skipped_train);
}

// ---------------------------------------------------------------- commands

struct PreprocessArgs {
  Common c;
  std::string input;
  std::optional<std::string> grouping;
  std::optional<double> door_threshold;
  bool reject_unknown = false;
};

void cmd_preprocess(const PreprocessArgs& a, Manifest& man) {
  const Taxonomy tax = load_taxonomy(a.c);
  ImportOptions opt;
  const json section = config_section(a.c, "preprocess");
  opt.door_threshold = section.value("door_threshold", opt.door_threshold);
  opt.reject_unknown = section.value("reject_unknown", opt.reject_unknown);
  override(opt.door_threshold, a.door_threshold);
  if (a.reject_unknown) opt.reject_unknown = true;
  if (a.grouping) {
    opt.grouping = GroupingMap::load(*a.grouping);
    man.input(*a.grouping);
  }
  man.input(a.input);
  man.set_config({{"door_threshold", opt.door_threshold},
                  {"reject_unknown", opt.reject_unknown},
                  {"grouping", opt.grouping.to_json()}});
  ImportReport rep;
  const Corpus corpus = import_corpus_file(a.input, tax, opt, &rep);
  write_json_file(man.path("corpus.json"), export_corpus(corpus, tax));
  write_json_file(man.path("report.json"), rep.to_json());
  man.output("corpus.json");
  man.output("report.json");
  fmt::print(stderr, "imported {} of {} rooms\n", rep.imported, rep.rooms_read);
}

struct SynthArgs {
  Common c;
  std::optional<int> n;
  std::optional<std::string> type;
  std::optional<double> bad_fraction, sloppy_fraction, validation_fraction;
};

void cmd_synth(const SynthArgs& a, Manifest& man) {
  const Taxonomy tax = load_taxonomy(a.c);
  const json section = config_section(a.c, "synth");
  SynthOptions opt = SynthOptions::from_json(section);
  override(opt.bad_fraction, a.bad_fraction);
  override(opt.sloppy_fraction, a.sloppy_fraction);
  override(opt.validation_fraction, a.validation_fraction);
  opt.check();
  const int n = a.n.value_or(section.value("n", 500));
  const std::string type = a.type.value_or(section.value("type", std::string("bedroom")));
  const std::uint64_t seed = a.c.seed.value_or(section.value("seed", std::uint64_t{0}));
  if (n < 1) throw InputError("--n must be at least 1");
  man.set_seed(seed);
  man.set_config({{"n", n}, {"type", type}, {"options", opt.to_json()}});
  const Corpus corpus = synth_corpus(n, type, seed, tax, opt);
  write_json_file(man.path("corpus.json"), export_corpus(corpus, tax));
  man.output("corpus.json");
  fmt::print(stderr, "{} rooms ({} train, {} validation)\n", corpus.size(), corpus.train.size(),
             corpus.validation.size());
}

struct TrainArgs {
  Common c;
  std::string corpus;
  std::string variant = "V0";
  TrainFlags t;
};

void cmd_train(const TrainArgs& a, Manifest& man) {
  const Taxonomy tax = load_taxonomy(a.c);
  const ExemptPairs exempt = load_exempt(a.c, tax);
  const TrainConfig tc = a.t.train_config(a.c);
  const ModelConfig mc = a.t.model_config(a.c);
  const Variant v = variant_from_name(a.variant);
  const Corpus corpus = load_corpus(a.corpus, tax);
  const CodecConfig codec = CodecConfig::for_taxonomy(tax, corpus.bounds);
  man.input(a.corpus);
  man.set_seed(tc.seed);
  man.set_config({{"variant", a.variant}, {"train", tc.to_json()}, {"model", mc.to_json()}, {"codec", codec_to_json(codec)}});
  Stopwatch sw;
  TrainResult res = train(corpus, codec, tax, exempt, mc, tc, v, {[](const EpochMetrics& m) { log_epoch("", m); }});
  man.phase("train", sw.lap());
  write_training_outputs(man, res);
}

struct FinetuneArgs {
  Common c;
  std::string base, corpus;
  std::optional<std::string> room_type;
  std::string variant = "V0";
  TrainFlags t;
};

void cmd_finetune(const FinetuneArgs& a, Manifest& man) {
  const Model base = Model::load(a.base);
  const Taxonomy tax = load_taxonomy(a.c, &base);
  const ExemptPairs exempt = load_exempt(a.c, tax);
  const TrainConfig tc = a.t.train_config(a.c);
  const CodecConfig codec = codec_of(base);
  Corpus corpus = load_corpus(a.corpus, tax);
  if (a.room_type) corpus = corpus.only_type(*a.room_type);
  if (corpus.train.empty()) throw InputError("no training rooms of the requested type");
  man.input(a.base);
  man.input(a.corpus);
  man.set_seed(tc.seed);
  man.set_config({{"variant", a.variant}, {"room_type", a.room_type.value_or("")}, {"train", tc.to_json()}});
  Stopwatch sw;
  TrainResult res = fine_tune(base, corpus, codec, tax, exempt, tc, variant_from_name(a.variant),
                              {[](const EpochMetrics& m) { log_epoch("", m); }});
  man.phase("finetune", sw.lap());
  write_training_outputs(man, res);
}

struct GenerateArgs {
  Common c;
  std::string model;
  int n = 100;
  int threads = 0;
  std::optional<std::string> prefix_corpus;
  bool svg = false;
  SamplerFlags s;
};

void cmd_generate(const GenerateArgs& a, Manifest& man) {
  const Model model = Model::load(a.model);
  const Taxonomy tax = load_taxonomy(a.c, &model);
  const ExemptPairs exempt = load_exempt(a.c, tax);
  const CodecConfig codec = codec_of(model);
  SamplerConfig sc = a.s.sampler_config(a.c);
  std::vector<Layout> prefixes;
  if (a.prefix_corpus) {
    const Corpus pc = load_corpus(*a.prefix_corpus, tax);
    prefixes = pc.validation.empty() ? pc.train : pc.validation;
    if (prefixes.empty()) throw InputError("prefix corpus is empty");
    sc.mode = GenerationMode::kRoomConditioned;
    man.input(*a.prefix_corpus);
  }
  if (a.n < 1) throw InputError("--n must be at least 1");
  const std::uint64_t seed = a.c.seed.value_or(0);
  man.input(a.model);
  man.set_seed(seed);
  man.set_config({{"sampler", sc.to_json()}, {"n", a.n}});

  Stopwatch sw;
  const GenerationContext ctx{model, codec, tax, exempt};
  const auto scenes = generate_many(ctx, sc, a.n, seed, a.threads, prefixes.empty() ? nullptr : &prefixes);
  const double gen_s = sw.lap();
  man.phase("generate", gen_s);

  std::vector<Layout> ok;
  json placed = json::array();
  std::string csv = "scene,failed,ergo_score,ergo_weight,intersection_loss,objects,rejections,restarts\n";
  if (a.svg) fs::create_directories(man.path("svg"));
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    const GeneratedScene& g = scenes[i];
    if (g.failed) {
      csv += fmt::format("{},1,,,,,{},{}\n", i, g.stats.rejections, g.stats.restarts);
      continue;
    }
    Layout l = g.layout;
    l.source_id = fmt::format("scene-{:05d}", i);
    const ErgoReport er = activity_costs(l, tax);
    csv += fmt::format("{},0,{:.6f},{:.6f},{:.6f},{},{},{}\n", i, er.score, er.weight_score,
                       scene_intersection_loss(l, exempt), l.furniture_count(), g.stats.rejections, g.stats.restarts);
    json p = post_process(l, tax).to_json();
    p["id"] = l.source_id;
    placed.push_back(p);
    if (a.svg) write_text_file(man.path(fmt::format("svg/{}.svg", l.source_id)), render_svg(l, tax));
    ok.push_back(std::move(l));
  }
  write_json_file(man.path("scenes.json"), scenes_to_json(ok, tax));
  write_json_file(man.path("placed.json"), placed);
  write_text_file(man.path("scenes.csv"), csv);
  man.output("scenes.json");
  man.output("placed.json");
  man.output("scenes.csv");
  if (a.svg) man.output("svg");
  fmt::print(stderr, "{} scenes ({} failed) in {:.2f}s, {:.1f} scenes/s\n", scenes.size(), scenes.size() - ok.size(),
             gen_s, static_cast<double>(scenes.size()) / gen_s);
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json score_layout(const Layout& l, const Taxonomy& tax, const ExemptPairs& exempt) {
  const ErgoReport er = scene_score_grad(l, tax);
  const IntersectionReport ir = scene_intersection_loss_grad(l, exempt);
  json acts = json::object();
  for (int k = 0; k < kNumActivities; ++k) {
    const auto i = static_cast<std::size_t>(k);
    acts[activity_name(static_cast<Activity>(k))] = {{"scaled", optional_json(er.activity[i])},
                                                      {"unscaled", optional_json(er.activity_unscaled[i])}};
  }
  static constexpr const char* kAttr[kNumAttrs] = {"orientation", "width", "depth", "x", "y"};
  json objs = json::array();
  for (std::size_t i = 1; i < l.objects.size(); ++i) {
    json ge = json::object(), gi = json::object();
    double me = 0.0, mi = 0.0;
    for (int a = 0; a < kNumAttrs; ++a) {
      const double de = er.gradient[i][static_cast<std::size_t>(a)];
      const double di = ir.gradient[i][static_cast<std::size_t>(a)];
      ge[kAttr[a]] = de;
      gi[kAttr[a]] = di;
      me += de * de;
      mi += di * di;
    }
    objs.push_back({{"index", i},
                    {"category", tax.at(l.objects[i].category).name},
                    {"ergo_gradient", ge},
                    {"ergo_gradient_magnitude", std::sqrt(me)},
                    {"intersection_gradient", gi},
                    {"intersection_gradient_magnitude", std::sqrt(mi)}});
  }
  return {{"id", l.source_id},
          {"activities", acts},
          {"score", er.score},
          {"weight_score", er.weight_score},
          {"intersection_loss", ir.loss},
          {"intersection_weight", clamp_unit(ir.loss)},
          {"objects", objs}};
}

struct ScoreArgs {
  Common c;
  std::string layout;
};

void cmd_score(const ScoreArgs& a, Manifest& man) {
  const Taxonomy tax = load_taxonomy(a.c);
  const ExemptPairs exempt = load_exempt(a.c, tax);
  const std::vector<Layout> scenes = scenes_from_json(read_json_file(a.layout), tax);
  man.input(a.layout);
  json rooms = json::array();
  for (const Layout& l : scenes) {
    const auto bad = validate(l, tax);
    if (!bad.empty())
      throw ParseError(a.layout, fmt::format("room '{}' object {}: {}", l.source_id, bad[0].index, bad[0].what));
    rooms.push_back(score_layout(l, tax, exempt));
  }
  write_json_file(man.path("score.json"), {{"rooms", rooms}});
  man.output("score.json");
}

struct RenderArgs {
  Common c;
  std::string layout;
  std::optional<double> scale;
  bool no_labels = false;
};

void cmd_render(const RenderArgs& a, Manifest& man) {
  const Taxonomy tax = load_taxonomy(a.c);
  const std::vector<Layout> scenes = scenes_from_json(read_json_file(a.layout), tax);
  SvgStyle style;
  override(style.scale, a.scale);
  style.labels = !a.no_labels;
  man.input(a.layout);
  man.set_config({{"scale", style.scale}, {"margin", style.margin}, {"labels", style.labels}});
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    std::string name = scenes[i].source_id.empty() ? fmt::format("room-{:05d}", i) : scenes[i].source_id;
    for (char& ch : name)
      if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '-' && ch != '_') ch = '_';
    write_text_file(man.path(name + ".svg"), render_svg(scenes[i], tax, style));
    man.output(name + ".svg");
  }
}

struct AblateArgs {
  Common c;
  std::optional<std::string> corpus;
  int synth_n = 500;
  std::string synth_type = "bedroom";
  int scenes = 1000;
  int threads = 0;
  std::optional<std::string> cache;
  std::vector<std::string> variants{"V0", "V1", "V2", "V3"};
  TrainFlags t;
  SamplerFlags s;
};

void cmd_ablate(const AblateArgs& a, Manifest& man) {
  const Taxonomy tax = load_taxonomy(a.c);
  const ExemptPairs exempt = load_exempt(a.c, tax);
  AblationConfig cfg;
  cfg.train = a.t.train_config(a.c);
  cfg.model = a.t.model_config(a.c);
  cfg.sampler = a.s.sampler_config(a.c);
  cfg.scenes = a.scenes;
  cfg.threads = a.threads;
  cfg.cache_dir = a.cache.value_or("");
  cfg.variants.clear();
  for (const auto& v : a.variants) cfg.variants.push_back(variant_from_name(v));
  Corpus corpus;
  if (a.corpus) {
    corpus = load_corpus(*a.corpus, tax);
    man.input(*a.corpus);
  } else {
    corpus = synth_corpus(a.synth_n, a.synth_type, cfg.train.seed, tax);
  }
  const CodecConfig codec = CodecConfig::for_taxonomy(tax, corpus.bounds);
  json conf = cfg.to_json();
  if (!a.corpus) conf["synth"] = {{"n", a.synth_n}, {"type", a.synth_type}};
  man.set_seed(cfg.train.seed);
  man.set_config(conf);
  Stopwatch sw;
  AblationCallbacks cb;
  cb.on_epoch = [](Variant v, const EpochMetrics& m) { log_epoch(std::string(variant_name(v)) + " ", m); };
  cb.on_variant = [](const AblationRow& r) {
    fmt::print(stderr, "{}: mean {:.4f} [{:.4f}, {:.4f}] over {} scenes{}\n", variant_name(r.variant), r.mean,
               r.ci_low, r.ci_high, r.scenes, r.cached ? " (cached model)" : "");
  };
  const AblationReport rep = run_ablation(corpus, codec, tax, exempt, cfg, cb);
  man.phase("ablation", sw.lap());
  write_text_file(man.path("ablation.csv"), ablation_csv(rep));
  write_text_file(man.path("ablation.svg"), ablation_svg(rep));
  man.output("ablation.csv");
  man.output("ablation.svg");
}

template <class Args>
int run(const std::string& name, const Args& args, void (*fn)(const Args&, Manifest&)) {
  Manifest man(name, args.c.out);
  if (args.c.seed) man.set_seed(*args.c.seed);
  if (args.c.config) man.input(*args.c.config);
  try {
    fn(args, man);
  } catch (...) {
    man.write("failed");
    throw;
  }
  man.write("ok");
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"layoutlab: expert-guided furniture layout synthesis"};
  app.set_version_flag("--version", std::string("layoutlab ") + LAYOUTLAB_VERSION);
  app.require_subcommand(1);

  PreprocessArgs pre;
  auto* s_pre = app.add_subcommand("preprocess", "Import an interchange corpus (filters, door attachment, grouping)");
  add_common(s_pre, pre.c);
  s_pre->add_option("-i,--input", pre.input, "Interchange JSON")->required();
  s_pre->add_option("--grouping", pre.grouping, "Category grouping map JSON");
  s_pre->add_option("--door-threshold", pre.door_threshold, "Door-to-wall distance threshold (m)");
  s_pre->add_flag("--reject-unknown", pre.reject_unknown, "Fail on unknown categories instead of dropping them");

  SynthArgs syn;
  auto* s_syn = app.add_subcommand("synth-corpus", "Generate a synthetic corpus");
  add_common(s_syn, syn.c);
  s_syn->add_option("-n,--n", syn.n, "Number of rooms");
  s_syn->add_option("--type", syn.type, "bedroom | livingroom | mixed");
  s_syn->add_option("--bad-fraction", syn.bad_fraction, "Share of rooms with poor ergonomics");
  s_syn->add_option("--sloppy-fraction", syn.sloppy_fraction, "Share of rooms with overlapping pieces");
  s_syn->add_option("--validation-fraction", syn.validation_fraction, "Validation share");

  TrainArgs tr;
  auto* s_tr = app.add_subcommand("train", "Train a model on a corpus");
  add_common(s_tr, tr.c);
  s_tr->add_option("--corpus", tr.corpus, "Interchange corpus JSON")->required();
  s_tr->add_option("--variant", tr.variant, "V0 | V1 | V2 | V3");
  tr.t.add(s_tr);

  FinetuneArgs ft;
  auto* s_ft = app.add_subcommand("finetune", "Fine-tune a checkpoint on one room type");
  add_common(s_ft, ft.c);
  s_ft->add_option("--base", ft.base, "Base checkpoint")->required();
  s_ft->add_option("--corpus", ft.corpus, "Interchange corpus JSON")->required();
  s_ft->add_option("--room-type", ft.room_type, "Keep only rooms of this type");
  s_ft->add_option("--variant", ft.variant, "V0 | V1 | V2 | V3");
  ft.t.add(s_ft);

  GenerateArgs gen;
  auto* s_gen = app.add_subcommand("generate", "Sample scenes from a checkpoint");
  add_common(s_gen, gen.c);
  s_gen->add_option("--model", gen.model, "Checkpoint")->required();
  s_gen->add_option("-n,--n", gen.n, "Number of scenes");
  s_gen->add_option("--threads", gen.threads, "Worker threads (0 = hardware)");
  s_gen->add_option("--prefix-corpus", gen.prefix_corpus, "Room-conditioned generation from these rooms");
  s_gen->add_flag("--svg", gen.svg, "Also render every scene as SVG");
  gen.s.add(s_gen);

  ScoreArgs sco;
  auto* s_sco = app.add_subcommand("score", "Ergonomic and intersection scores of layouts");
  add_common(s_sco, sco.c);
  s_sco->add_option("--layout", sco.layout, "Interchange JSON")->required();

  AblateArgs abl;
  auto* s_abl = app.add_subcommand("ablate", "Train V0-V3 and compare generated-scene expert scores");
  add_common(s_abl, abl.c);
  s_abl->add_option("--corpus", abl.corpus, "Interchange corpus JSON (default: synthetic)");
  s_abl->add_option("--synth-n", abl.synth_n, "Synthetic corpus size when no corpus is given");
  s_abl->add_option("--synth-type", abl.synth_type, "Synthetic room type");
  s_abl->add_option("--scenes", abl.scenes, "Scenes generated per variant");
  s_abl->add_option("--threads", abl.threads, "Generation threads (0 = hardware)");
  s_abl->add_option("--cache", abl.cache, "Checkpoint cache directory");
  s_abl->add_option("--variants", abl.variants, "Subset of V0 V1 V2 V3");
  abl.t.add(s_abl);
  abl.s.add(s_abl);

  RenderArgs ren;
  auto* s_ren = app.add_subcommand("render", "Render layouts as SVG");
  add_common(s_ren, ren.c);
  s_ren->add_option("--layout", ren.layout, "Interchange JSON")->required();
  s_ren->add_option("--scale", ren.scale, "Pixels per meter");
  s_ren->add_flag("--no-labels", ren.no_labels, "Omit category labels");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*s_pre) return run("preprocess", pre, cmd_preprocess);
    if (*s_syn) return run("synth-corpus", syn, cmd_synth);
    if (*s_tr) return run("train", tr, cmd_train);
    if (*s_ft) return run("finetune", ft, cmd_finetune);
    if (*s_gen) return run("generate", gen, cmd_generate);
    if (*s_sco) return run("score", sco, cmd_score);
    if (*s_abl) return run("ablate", abl, cmd_ablate);
    if (*s_ren) return run("render", ren, cmd_render);
  } catch (const DivergenceError& e) {
    fmt::print(stderr, "error: training diverged: {}\n", e.what());
    return kDivergence;
  } catch (const ParseError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kDataError;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kDataError;
  }
  return kUsage;
}
