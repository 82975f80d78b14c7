#include "layoutlab/generate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "layoutlab/error.hpp"
#include "layoutlab/sampler.hpp"

namespace layoutlab {

namespace {

std::vector<double> softmax_row(const Model::Matrix& logits, Eigen::Index row) {
  const Eigen::Index V = logits.cols();
  std::vector<double> p(static_cast<std::size_t>(V));
  double mx = -1e300;
  for (Eigen::Index j = 0; j < V; ++j) mx = std::max(mx, static_cast<double>(logits(row, j)));
  double sum = 0.0;
  for (Eigen::Index j = 0; j < V; ++j) {
    const double e = std::exp(static_cast<double>(logits(row, j)) - mx);
    p[static_cast<std::size_t>(j)] = e;
    sum += e;
  }
  for (double& v : p) v /= sum;
  return p;
}

// Chooses the token at sequence offset `offset`. `tokens` holds everything
// before it.
class TokenPolicy {
 public:
  TokenPolicy(const GenerationContext& ctx, const SamplerConfig& cfg) : ctx_(ctx), cfg_(cfg) {}

  // Category slot; returns the stop token to end the scene.
  int category(std::vector<double> p, std::mt19937_64& rng) const {
    const CodecConfig& c = ctx_.codec;
    for (int t = 0; t < static_cast<int>(p.size()); ++t) {
      bool ok = t == c.stop_token() || (t < c.num_categories && t != c.room_category);
      if (ok && cfg_.mode == GenerationMode::kRoomConditioned && t < c.num_categories && c.is_wall_category(t))
        ok = false;
      if (!ok) p[static_cast<std::size_t>(t)] = 0.0;
    }
    return nucleus_sample(p, cfg_.top_p, rng);
  }

  // Attribute `slot` (1..5) of an object with category `cat` (room included).
  int attribute(std::vector<double> p, int cat, std::size_t slot, std::mt19937_64& rng) const {
    const CodecConfig& c = ctx_.codec;
    const int r = c.resolution;
    p.resize(static_cast<std::size_t>(r));
    if (cat == c.room_category) {
      // The room sits at the origin facing one of the two encodable directions.
      if (slot == 4 || slot == 5) return 1;
      if (slot == 1) {
        const int a = quantize_orientation(0.0, r), b = quantize_orientation(-kPi / 2, r);
        for (int t = 0; t < r; ++t)
          if (t != a && t != b) p[static_cast<std::size_t>(t)] = 0.0;
      }
      if (slot == 2) p[static_cast<std::size_t>(r - 1)] = 0.0;
    }
    const bool sampled = cat == c.room_category || c.is_wall_category(cat);
    return sampled ? nucleus_sample(p, cfg_.top_p, rng) : argmax(p);
  }

 private:
  const GenerationContext& ctx_;
  const SamplerConfig& cfg_;
};

// One sequence advanced by batched model steps; no collision handling.
struct Lane {
  std::mt19937_64 rng;
  Model::KvCache cache;
  std::vector<int> tokens;
  std::vector<int> prefix;
  int pending = 0;
  bool done = false;
  int steps = 0;
};

void run_lockstep(const GenerationContext& ctx, const SamplerConfig& cfg, std::vector<Lane>& lanes) {
  const TokenPolicy policy(ctx, cfg);
  const CodecConfig& codec = ctx.codec;
  const std::size_t max_tokens = static_cast<std::size_t>(codec.max_tokens());
  std::vector<int> toks, idx;
  std::vector<Model::KvCache*> caches;
  std::vector<std::size_t> active;
  while (true) {
    toks.clear();
    idx.clear();
    caches.clear();
    active.clear();
    for (std::size_t b = 0; b < lanes.size(); ++b) {
      if (lanes[b].done) continue;
      active.push_back(b);
      toks.push_back(lanes[b].pending);
      idx.push_back(slot_index(lanes[b].tokens.size()));
      caches.push_back(&lanes[b].cache);
    }
    if (active.empty()) break;
    const Model::Matrix logits = ctx.model.step(toks, idx, caches);
    for (std::size_t a = 0; a < active.size(); ++a) {
      Lane& L = lanes[active[a]];
      L.tokens.push_back(L.pending);
      ++L.steps;
      const std::size_t k = L.tokens.size();
      if (k < L.prefix.size()) {
        L.pending = L.prefix[k];
        continue;
      }
      const std::size_t slot = k % kTupleSize;
      const std::vector<double> p = softmax_row(logits, static_cast<Eigen::Index>(a));
      if (slot == 0) {
        const int t = k >= max_tokens ? codec.stop_token() : policy.category(p, L.rng);
        if (t == codec.stop_token()) {
          L.tokens.push_back(t);
          L.done = true;
        } else {
          L.pending = t;
        }
      } else {
        L.pending = policy.attribute(p, L.tokens[k - slot], slot, L.rng);
      }
    }
  }
}

}  // namespace

void SamplerConfig::check() const {
  if (!(top_p > 0.0 && top_p <= 1.0)) throw InputError("top_p must lie in (0, 1]");
  if (resample_limit < 1) throw InputError("resample_limit must be at least 1");
  if (restart_budget < 1) throw InputError("restart_budget must be at least 1");
  if (!(area_ratio_threshold >= 0.0)) throw InputError("area_ratio_threshold must be non-negative");
}

nlohmann::json SamplerConfig::to_json() const {
  return {{"top_p", top_p},
          {"resample_limit", resample_limit},
          {"area_ratio_threshold", area_ratio_threshold},
          {"collision_checks", collision_checks},
          {"restart_budget", restart_budget},
          {"mode", mode == GenerationMode::kRoomConditioned ? "room-conditioned" : "unconditional"}};
}

SamplerConfig SamplerConfig::from_json(const nlohmann::json& j) {
  SamplerConfig c;
  c.top_p = j.value("top_p", c.top_p);
  c.resample_limit = j.value("resample_limit", c.resample_limit);
  c.area_ratio_threshold = j.value("area_ratio_threshold", c.area_ratio_threshold);
  c.collision_checks = j.value("collision_checks", c.collision_checks);
  c.restart_budget = j.value("restart_budget", c.restart_budget);
  const std::string mode = j.value("mode", std::string("unconditional"));
  if (mode == "room-conditioned") c.mode = GenerationMode::kRoomConditioned;
  else if (mode != "unconditional") throw ParseError("/mode", "expected unconditional or room-conditioned");
  c.check();
  return c;
}

std::uint64_t scene_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t x = seed * 0x9e3779b97f4a7c15ull + index + 1;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

std::vector<int> conditioning_prefix(const Layout& layout, const CodecConfig& codec, const Taxonomy& taxonomy) {
  Layout shell;
  shell.objects.push_back(layout.objects.at(0));
  for (std::size_t i = 1; i < layout.objects.size(); ++i)
    if (taxonomy.is_wall_element(layout.objects[i].category)) shell.objects.push_back(layout.objects[i]);
  shell = canonical_order(shell, taxonomy, 0);
  const TokenSequence seq = encode(shell, codec);
  return {seq.tokens.begin(), seq.tokens.begin() + static_cast<std::ptrdiff_t>(kTupleSize * shell.objects.size())};
}

GeneratedScene generate(const GenerationContext& ctx, const SamplerConfig& cfg, std::mt19937_64& rng,
                        const Layout* prefix) {
  cfg.check();
  const CodecConfig& codec = ctx.codec;
  const int r = codec.resolution;
  const bool conditioned = cfg.mode == GenerationMode::kRoomConditioned;
  if (conditioned && !prefix) throw InputError("room-conditioned generation needs a prefix layout");
  const std::vector<int> pre =
      conditioned ? conditioning_prefix(*prefix, codec, ctx.taxonomy) : std::vector<int>{codec.room_category};
  const TokenPolicy policy(ctx, cfg);
  const CollisionOptions copt{cfg.area_ratio_threshold};

  GeneratedScene out;
  for (int attempt = 0; attempt <= cfg.restart_budget; ++attempt) {
    if (attempt > 0) ++out.stats.restarts;
    Model::KvCache cache = ctx.model.make_cache();
    std::vector<int> tokens;
    Model::Matrix logits;
    auto feed = [&](int tok) {
      const int t[1] = {tok};
      const int ix[1] = {slot_index(tokens.size())};
      Model::KvCache* c[1] = {&cache};
      logits = ctx.model.step(t, ix, c);
      tokens.push_back(tok);
      ++out.stats.model_steps;
    };
    for (int t : pre) feed(t);
    while (tokens.size() < static_cast<std::size_t>(kTupleSize))
      feed(policy.attribute(softmax_row(logits, 0), codec.room_category, tokens.size(), rng));

    Layout layout = decode(tokens, codec);
    const double cell = decode_room(std::span<const int>(tokens).first(kTupleSize), codec).cell;
    bool failed = false;
    while (static_cast<int>(layout.objects.size()) < codec.max_objects) {
      const Model::Matrix saved_logits = logits;
      const int saved_len = cache.length;
      const std::size_t saved_tokens = tokens.size();
      bool stop = false, accepted = false;
      for (int tries = 0; tries < cfg.resample_limit && !accepted; ++tries) {
        const int cat = policy.category(softmax_row(logits, 0), rng);
        if (cat == codec.stop_token()) {
          stop = true;
          break;
        }
        feed(cat);
        for (std::size_t s = 1; s < static_cast<std::size_t>(kTupleSize); ++s) feed(policy.attribute(softmax_row(logits, 0), cat, s, rng));
        const FurnObj obj = decode_furniture(std::span<const int>(tokens).last(kTupleSize), cell, r);
        if (!cfg.collision_checks || collision_check(layout, obj, ctx.exempt, copt)) {
          layout.objects.push_back(obj);
          accepted = true;
        } else {
          ++out.stats.rejections;
          cache.length = saved_len;
          tokens.resize(saved_tokens);
          logits = saved_logits;
        }
      }
      if (stop) break;
      if (!accepted) {
        failed = true;
        break;
      }
    }
    if (failed) continue;
    tokens.push_back(codec.stop_token());
    out.layout = std::move(layout);
    out.tokens = std::move(tokens);
    return out;
  }
  throw GenerationFailure("restart budget of " + std::to_string(cfg.restart_budget) + " scenes exhausted");
}

std::vector<GeneratedScene> generate_many(const GenerationContext& ctx, const SamplerConfig& cfg, int n,
                                          std::uint64_t seed, int threads, const std::vector<Layout>* prefixes) {
  cfg.check();
  if (n < 0) throw InputError("scene count must be non-negative");
  if (cfg.mode == GenerationMode::kRoomConditioned && (!prefixes || prefixes->empty()))
    throw InputError("room-conditioned generation needs prefix layouts");
  if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  std::vector<GeneratedScene> out(static_cast<std::size_t>(n));
  const auto prefix_of = [&](int i) -> const Layout* {
    return prefixes && !prefixes->empty() ? &(*prefixes)[static_cast<std::size_t>(i) % prefixes->size()] : nullptr;
  };

  // Work items: single scenes with collision checks, lockstep chunks without.
  const int chunk = cfg.collision_checks ? 1 : 64;
  const int items = (n + chunk - 1) / chunk;
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;

  auto worker = [&] {
    try {
      for (int it = next++; it < items; it = next++) {
        const int lo = it * chunk, hi = std::min(n, lo + chunk);
        if (cfg.collision_checks) {
          std::mt19937_64 rng(scene_seed(seed, static_cast<std::uint64_t>(lo)));
          try {
            out[static_cast<std::size_t>(lo)] = generate(ctx, cfg, rng, prefix_of(lo));
          } catch (const GenerationFailure&) {
            out[static_cast<std::size_t>(lo)].failed = true;
            out[static_cast<std::size_t>(lo)].stats.restarts = cfg.restart_budget;
          }
          continue;
        }
        std::vector<Lane> lanes(static_cast<std::size_t>(hi - lo));
        for (int i = lo; i < hi; ++i) {
          Lane& L = lanes[static_cast<std::size_t>(i - lo)];
          L.rng.seed(scene_seed(seed, static_cast<std::uint64_t>(i)));
          L.cache = ctx.model.make_cache();
          L.prefix = cfg.mode == GenerationMode::kRoomConditioned
                         ? conditioning_prefix(*prefix_of(i), ctx.codec, ctx.taxonomy)
                         : std::vector<int>{ctx.codec.room_category};
          L.pending = L.prefix[0];
        }
        // Room attributes of unconditional lanes are sampled inside the
        // lockstep loop through the attribute policy.
        run_lockstep(ctx, cfg, lanes);
        for (int i = lo; i < hi; ++i) {
          Lane& L = lanes[static_cast<std::size_t>(i - lo)];
          GeneratedScene& g = out[static_cast<std::size_t>(i)];
          g.layout = decode(L.tokens, ctx.codec);
          g.tokens = std::move(L.tokens);
          g.stats.model_steps = L.steps;
        }
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mutex);
      if (!error) error = std::current_exception();
    }
  };
  const int nthreads = std::min(threads, std::max(1, items));
  std::vector<std::thread> pool;
  for (int t = 1; t < nthreads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
  return out;
}

}  // namespace layoutlab
