#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <json.hpp>

#include "layoutlab/codec.hpp"
#include "layoutlab/geom.hpp"
#include "layoutlab/model.hpp"

namespace layoutlab {

enum class GenerationMode { kUnconditional, kRoomConditioned };

struct SamplerConfig {
  double top_p = 0.9;
  int resample_limit = 20;  // attempts per object before the scene restarts
  double area_ratio_threshold = 0.2;
  bool collision_checks = true;
  int restart_budget = 50;
  GenerationMode mode = GenerationMode::kUnconditional;

  void check() const;
  nlohmann::json to_json() const;
  static SamplerConfig from_json(const nlohmann::json& j);
};

struct GenerationStats {
  int rejections = 0;  // objects discarded by the collision check
  int restarts = 0;    // whole-scene restarts
  int model_steps = 0;
};

struct GeneratedScene {
  Layout layout;
  std::vector<int> tokens;  // through the stop token, unpadded
  GenerationStats stats;
  bool failed = false;  // set by generate_many when the restart budget ran out
};

// Everything generation reads; shared read-only across threads.
struct GenerationContext {
  const Model& model;
  const CodecConfig& codec;
  const Taxonomy& taxonomy;
  const ExemptPairs& exempt;
};

// Room, doors and windows of `layout` in canonical order; the tokens a
// room-conditioned run starts from.
std::vector<int> conditioning_prefix(const Layout& layout, const CodecConfig& codec, const Taxonomy& taxonomy);

// One scene. In room-conditioned mode `prefix` (room + doors + windows) is
// required and kept verbatim. Throws GenerationFailure when the restart
// budget runs out.
GeneratedScene generate(const GenerationContext& ctx, const SamplerConfig& cfg, std::mt19937_64& rng,
                        const Layout* prefix = nullptr);

// n scenes; scene i uses its own stream derived from (seed, i), so results do
// not depend on the thread count. With collision checks off, scenes advance
// in lockstep through batched model steps. `prefixes`, when given, is cycled.
std::vector<GeneratedScene> generate_many(const GenerationContext& ctx, const SamplerConfig& cfg, int n,
                                          std::uint64_t seed, int threads = 0,
                                          const std::vector<Layout>* prefixes = nullptr);

std::uint64_t scene_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace layoutlab
