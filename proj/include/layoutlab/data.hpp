#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "layoutlab/category.hpp"
#include "layoutlab/layout.hpp"

namespace layoutlab {

// Train/validation layouts plus the room-size bounds the codec quantizes
// against (computed over the training split).
struct Corpus {
  std::vector<Layout> train;
  std::vector<Layout> validation;
  DatasetBounds bounds;

  std::size_t size() const { return train.size() + validation.size(); }
  std::vector<std::string> room_types() const;
  // Layouts of one room type; bounds are kept so the codec stays compatible.
  Corpus only_type(const std::string& type) const;

  // Min/max of room width and depth; degenerate ranges are widened by 0.5 m.
  static DatasetBounds compute_bounds(const std::vector<Layout>& layouts);

  bool operator==(const Corpus&) const = default;
};

// Maps source category names onto taxonomy names.
struct GroupingMap {
  std::map<std::string, std::string> names;

  static GroupingMap from_json(const nlohmann::json& j);
  static GroupingMap load(const std::string& path);
  nlohmann::json to_json() const;
  std::string apply(const std::string& name) const;
};

struct ImportOptions {
  double door_threshold = 0.25;  // meters between a door candidate and its wall
  double angle_tolerance = 1e-3;  // radians from a wall-aligned orientation
  double rect_tolerance = 1e-6;   // relative area mismatch of the floor polygon
  bool reject_unknown = false;    // unknown categories: error instead of dropping
  GroupingMap grouping;
};

struct ImportReport {
  int rooms_read = 0;
  int imported = 0;
  int dropped_nonrectangular = 0;
  int dropped_invalid = 0;
  int doors_attached = 0;
  int doors_rejected = 0;
  int objects_regrouped = 0;
  int objects_dropped_unknown = 0;

  nlohmann::json to_json() const;
};

// Interchange document: {version, rooms:[{id, type, split?, width, depth,
// floor?, objects:[...], door_candidates?:[...]}]}.
Corpus import_corpus(const nlohmann::json& doc, const Taxonomy& taxonomy, const ImportOptions& options = {},
                     ImportReport* report = nullptr);
Corpus import_corpus_file(const std::string& path, const Taxonomy& taxonomy, const ImportOptions& options = {},
                          ImportReport* report = nullptr);
nlohmann::json export_corpus(const Corpus& corpus, const Taxonomy& taxonomy);

// True when the polygon's area equals that of its axis-aligned bounding box.
bool is_rectangular(const std::vector<Vec2>& polygon, double rel_tolerance = 1e-6);

// Smallest gap between the object's bounding box and a wall line of a
// width x depth room (0 when the box straddles the wall).
double wall_distance(const FurnObj& obj, double room_width, double room_depth);

struct AugmentRules {
  double lamp_on_stand = 0.5;
  double computer_on_desk = 0.5;
  double tv_on_tv_stand = 1.0;
  std::string lamp_category = "indoor_lamp";
  std::string computer_category = "computer";
  std::string tv_category = "tv";
  std::string tv_stand_category = "tv_stand";

  void check() const;  // probabilities in [0, 1]
  nlohmann::json to_json() const;
  static AugmentRules from_json(const nlohmann::json& j);
};

// Adds small supported objects centered on their supporters. Deterministic in
// `seed`; never exceeds the object cap.
Layout augment(const Layout& layout, const Taxonomy& taxonomy, const AugmentRules& rules, std::uint64_t seed);

// Places an object of the given size so its footprint is centered at `center`.
FurnObj centered_object(int category, double orientation, double width, double depth, Vec2 center);

}  // namespace layoutlab
