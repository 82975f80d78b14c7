#include "layoutlab/postprocess.hpp"

#include "layoutlab/error.hpp"
#include "layoutlab/geom.hpp"
#include "layoutlab/json_io.hpp"

namespace layoutlab {

HeightRules HeightRules::defaults() {
  HeightRules r;
  r.heights = {{"room", 2.8},          {"door", 2.1},          {"window", 1.2},        {"double_bed", 0.5},
               {"single_bed", 0.5},    {"kids_bed", 0.45},     {"sofa", 0.85},         {"wardrobe", 2.0},
               {"dining_table", 0.75}, {"bookshelf", 1.8},     {"desk", 0.75},         {"tv_stand", 0.5},
               {"coffee_table", 0.45}, {"dressing_table", 0.75}, {"cabinet", 0.9},     {"children_cabinet", 0.8},
               {"shelf", 1.2},         {"armchair", 0.9},      {"lounge_chair", 0.9},  {"chair", 0.9},
               {"dining_chair", 0.9},  {"stool", 0.45},        {"nightstand", 0.55},   {"side_table", 0.55},
               {"ceiling_lamp", 0.2},  {"pendant_lamp", 0.5},  {"floor_lamp", 1.6},    {"plant", 1.0},
               {"tv", 0.7},            {"computer", 0.45},     {"indoor_lamp", 0.45}};
  return r;
}

HeightRules HeightRules::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ParseError("", "height rules must be an object");
  HeightRules r = defaults();
  r.window_sill = j.value("window_sill", r.window_sill);
  r.ceiling_light = j.value("ceiling_light", r.ceiling_light);
  r.default_height = j.value("default_height", r.default_height);
  if (j.contains("heights")) {
    const auto& h = j["heights"];
    if (!h.is_object()) throw ParseError("/heights", "expected an object of name -> meters");
    for (auto it = h.begin(); it != h.end(); ++it) {
      if (!it.value().is_number()) throw ParseError("/heights/" + it.key(), "expected a number");
      r.heights[it.key()] = it.value().get<double>();
    }
  }
  return r;
}

HeightRules HeightRules::load(const std::string& path) {
  try {
    return from_json(read_json_file(path));
  } catch (const ParseError& e) {
    if (e.path() == path) throw;
    throw ParseError(path + "#" + e.path(), e.what());
  }
}

nlohmann::json HeightRules::to_json() const {
  return {{"window_sill", window_sill}, {"ceiling_light", ceiling_light}, {"default_height", default_height},
          {"heights", heights}};
}

double HeightRules::height_of(const std::string& name) const {
  const auto it = heights.find(name);
  return it == heights.end() ? default_height : it->second;
}

nlohmann::json PlacedScene::to_json() const {
  nlohmann::json objs = nlohmann::json::array();
  for (const PlacedObject& p : objects)
    objs.push_back({{"category", p.name},
                    {"orientation", p.obj.orientation},
                    {"width", p.obj.width},
                    {"depth", p.obj.depth},
                    {"x", p.obj.x},
                    {"y", p.obj.y},
                    {"z", p.z},
                    {"height", p.height},
                    {"support", p.support}});
  return {{"objects", std::move(objs)}};
}

PlacedScene post_process(const Layout& layout, const Taxonomy& taxonomy, const HeightRules& rules) {
  PlacedScene out;
  for (std::size_t i = 0; i < layout.objects.size(); ++i) {
    const FurnObj& o = layout.objects[i];
    PlacedObject p;
    p.obj = o;
    p.name = taxonomy.at(o.category).name;
    p.height = rules.height_of(p.name);
    if (i > 0) {
      const RoleSet& roles = taxonomy.at(o.category).roles;
      if (roles.has(Role::kWindow)) {
        p.z = rules.window_sill;
      } else if (roles.has(Role::kCeilingLight)) {
        p.z = rules.ceiling_light;
      } else if (roles.has(Role::kSupported)) {
        double best = 0.0;
        for (std::size_t j = 1; j < layout.objects.size(); ++j) {
          if (j == i || !taxonomy.has(layout.objects[j].category, Role::kSupporting)) continue;
          const double a = overlap_area(box_of(o), box_of(layout.objects[j]));
          if (a > best) {
            best = a;
            p.support = static_cast<int>(j);
          }
        }
        if (p.support >= 0)
          p.z = rules.height_of(taxonomy.at(layout.objects[static_cast<std::size_t>(p.support)].category).name);
      }
    }
    out.objects.push_back(std::move(p));
  }
  return out;
}

}  // namespace layoutlab
