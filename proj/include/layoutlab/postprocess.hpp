#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "layoutlab/category.hpp"
#include "layoutlab/layout.hpp"

namespace layoutlab {

struct HeightRules {
  double window_sill = 0.9;
  double ceiling_light = 2.5;
  double default_height = 0.75;
  std::map<std::string, double> heights;  // per category name, meters

  static HeightRules defaults();
  static HeightRules from_json(const nlohmann::json& j);
  static HeightRules load(const std::string& path);
  nlohmann::json to_json() const;
  double height_of(const std::string& name) const;
};

struct PlacedObject {
  FurnObj obj;
  std::string name;
  double z = 0.0;       // bottom elevation
  double height = 0.0;  // vertical extent
  int support = -1;     // index of the supporting object, if any
};

struct PlacedScene {
  std::vector<PlacedObject> objects;  // objects[0] is the room
  nlohmann::json to_json() const;
};

// Vertical placement: windows at the sill height, ceiling lights at the fixed
// height, supported objects on top of the supporter they overlap most in plan,
// everything else on the floor.
PlacedScene post_process(const Layout& layout, const Taxonomy& taxonomy, const HeightRules& rules = HeightRules::defaults());

}  // namespace layoutlab
