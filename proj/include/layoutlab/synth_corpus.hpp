#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "layoutlab/category.hpp"
#include "layoutlab/data.hpp"
#include "layoutlab/layout.hpp"

namespace layoutlab {

struct SynthOptions {
  // Share of rooms built with poor ergonomics: light sources and windows in the
  // line of sight of the main seat, no bedside lamps.
  double bad_fraction = 0.4;
  // Share of rooms where one or two pieces are pushed into a neighbour.
  double sloppy_fraction = 0.25;
  double validation_fraction = 0.1;
  double jitter = 0.05;  // meters of placement noise

  void check() const;
  nlohmann::json to_json() const;
  static SynthOptions from_json(const nlohmann::json& j);
};

// Room types: "bedroom", "livingroom", or "mixed" (alternating).
const std::vector<std::string>& synth_room_types();

// Room-size range used by a template; the corpus bounds are this range.
DatasetBounds synth_bounds(const std::string& room_type);

// One procedurally generated room. `bad` and `sloppy` select the defect modes.
Layout synth_room(const std::string& room_type, std::uint64_t seed, bool bad, bool sloppy, const Taxonomy& taxonomy,
                  double jitter = 0.05);

// n rooms split into train/validation; deterministic in `seed`.
Corpus synth_corpus(int n, const std::string& room_type, std::uint64_t seed, const Taxonomy& taxonomy,
                    const SynthOptions& options = {});

}  // namespace layoutlab
