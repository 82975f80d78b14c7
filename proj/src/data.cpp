#include "layoutlab/data.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include <fmt/format.h>

#include "layoutlab/error.hpp"
#include "layoutlab/json_io.hpp"

namespace layoutlab {

namespace {

bool wall_aligned(double orientation, double tol) {
  const double q = orientation / (0.5 * kPi);
  return std::abs(q - std::round(q)) * 0.5 * kPi <= tol;
}

double gap_to_line(double lo, double hi, double line) {
  if (lo <= line && line <= hi) return 0.0;
  return std::min(std::abs(lo - line), std::abs(hi - line));
}

struct ObjectParse {
  std::optional<FurnObj> obj;
  bool regrouped = false;
};

ObjectParse parse_object(const nlohmann::json& o, const std::string& at, const Taxonomy& tax,
                         const ImportOptions& opt) {
  if (!o.is_object()) throw ParseError(at, "expected an object");
  const std::string raw = json_string(o, "category", at);
  const std::string name = opt.grouping.apply(raw);
  ObjectParse out;
  out.regrouped = name != raw;
  const auto id = tax.find(name);
  FurnObj f;
  f.orientation = json_number(o, "orientation", at);
  f.width = json_number(o, "width", at);
  f.depth = json_number(o, "depth", at);
  f.x = json_number(o, "x", at);
  f.y = json_number(o, "y", at);
  if (!id) {
    if (opt.reject_unknown) throw ParseError(at + "/category", "unknown category '" + raw + "'");
    return out;
  }
  f.category = *id;
  out.obj = f;
  return out;
}

}  // namespace

std::vector<std::string> Corpus::room_types() const {
  std::set<std::string> types;
  for (const Layout& l : train) types.insert(l.room_type);
  for (const Layout& l : validation) types.insert(l.room_type);
  return {types.begin(), types.end()};
}

Corpus Corpus::only_type(const std::string& type) const {
  Corpus out;
  out.bounds = bounds;
  for (const Layout& l : train)
    if (l.room_type == type) out.train.push_back(l);
  for (const Layout& l : validation)
    if (l.room_type == type) out.validation.push_back(l);
  return out;
}

DatasetBounds Corpus::compute_bounds(const std::vector<Layout>& layouts) {
  if (layouts.empty()) throw InputError("cannot compute bounds of an empty corpus");
  DatasetBounds b{1e300, -1e300, 1e300, -1e300};
  for (const Layout& l : layouts) {
    b.w_min = std::min(b.w_min, l.room().width);
    b.w_max = std::max(b.w_max, l.room().width);
    b.d_min = std::min(b.d_min, l.room().depth);
    b.d_max = std::max(b.d_max, l.room().depth);
  }
  if (b.w_max - b.w_min < 1e-9) {
    b.w_min -= 0.5;
    b.w_max += 0.5;
  }
  if (b.d_max - b.d_min < 1e-9) {
    b.d_min -= 0.5;
    b.d_max += 0.5;
  }
  return b;
}

GroupingMap GroupingMap::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ParseError("", "grouping map must be an object of name -> group");
  GroupingMap g;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!it.value().is_string()) throw ParseError("/" + it.key(), "expected a category name");
    g.names[it.key()] = it.value().get<std::string>();
  }
  return g;
}

GroupingMap GroupingMap::load(const std::string& path) {
  try {
    return from_json(read_json_file(path));
  } catch (const ParseError& e) {
    if (e.path() == path) throw;
    throw ParseError(path + e.path(), e.what());
  }
}

nlohmann::json GroupingMap::to_json() const { return names; }

std::string GroupingMap::apply(const std::string& name) const {
  const auto it = names.find(name);
  return it == names.end() ? name : it->second;
}

nlohmann::json ImportReport::to_json() const {
  return {{"rooms_read", rooms_read},
          {"imported", imported},
          {"dropped_nonrectangular", dropped_nonrectangular},
          {"dropped_invalid", dropped_invalid},
          {"doors_attached", doors_attached},
          {"doors_rejected", doors_rejected},
          {"objects_regrouped", objects_regrouped},
          {"objects_dropped_unknown", objects_dropped_unknown}};
}

bool is_rectangular(const std::vector<Vec2>& polygon, double rel_tolerance) {
  if (polygon.size() < 4) return false;
  double lo_x = polygon[0].x, hi_x = lo_x, lo_y = polygon[0].y, hi_y = lo_y, twice = 0.0;
  for (std::size_t i = 0; i < polygon.size(); ++i) {
    const Vec2 a = polygon[i], b = polygon[(i + 1) % polygon.size()];
    lo_x = std::min(lo_x, a.x);
    hi_x = std::max(hi_x, a.x);
    lo_y = std::min(lo_y, a.y);
    hi_y = std::max(hi_y, a.y);
    twice += a.x * b.y - a.y * b.x;
  }
  const double box = (hi_x - lo_x) * (hi_y - lo_y);
  if (!(box > 0.0)) return false;
  return std::abs(0.5 * std::abs(twice) - box) <= rel_tolerance * box;
}

double wall_distance(const FurnObj& obj, double room_width, double room_depth) {
  const Vec2 e = extent_of(obj);
  return std::min({gap_to_line(obj.x, obj.x + e.x, 0.0), gap_to_line(obj.x, obj.x + e.x, room_width),
                   gap_to_line(obj.y, obj.y + e.y, 0.0), gap_to_line(obj.y, obj.y + e.y, room_depth)});
}

Corpus import_corpus(const nlohmann::json& doc, const Taxonomy& taxonomy, const ImportOptions& opt,
                     ImportReport* report) {
  ImportReport rep;
  if (!doc.is_object()) throw ParseError("", "expected a JSON object");
  const auto v = doc.find("version");
  if (v == doc.end() || !v->is_number_integer()) throw ParseError("/version", "missing integer version");
  if (v->get<int>() != kInterchangeVersion)
    throw ParseError("/version", fmt::format("unsupported version {}", v->get<int>()));
  const auto& rooms = json_array(doc, "rooms", "");

  std::vector<Layout> train, validation;
  for (std::size_t r = 0; r < rooms.size(); ++r) {
    const std::string where = fmt::format("/rooms/{}", r);
    const auto& room = rooms[r];
    if (!room.is_object()) throw ParseError(where, "expected an object");
    ++rep.rooms_read;

    Layout l;
    if (room.contains("id")) l.source_id = room["id"].is_string() ? room["id"].get<std::string>() : room["id"].dump();
    if (room.contains("type")) l.room_type = json_string(room, "type", where);
    FurnObj rm;
    rm.category = taxonomy.room_id();
    rm.width = json_number(room, "width", where);
    rm.depth = json_number(room, "depth", where);
    l.objects.push_back(rm);

    bool is_validation = false;
    if (room.contains("split")) {
      const std::string split = json_string(room, "split", where);
      if (split == "validation" || split == "val" || split == "test") is_validation = true;
      else if (split != "train") throw ParseError(where + "/split", "expected train, validation, val or test");
    }

    if (room.contains("floor")) {
      const auto& floor = json_array(room, "floor", where);
      std::vector<Vec2> poly;
      for (std::size_t i = 0; i < floor.size(); ++i) {
        const auto& pt = floor[i];
        if (!pt.is_array() || pt.size() != 2 || !pt[0].is_number() || !pt[1].is_number())
          throw ParseError(fmt::format("{}/floor/{}", where, i), "expected [x, y]");
        poly.push_back({pt[0].get<double>(), pt[1].get<double>()});
      }
      if (!is_rectangular(poly, opt.rect_tolerance)) {
        ++rep.dropped_nonrectangular;
        continue;
      }
    }

    const auto& objs = json_array(room, "objects", where);
    for (std::size_t i = 0; i < objs.size(); ++i) {
      const ObjectParse p = parse_object(objs[i], fmt::format("{}/objects/{}", where, i), taxonomy, opt);
      if (p.regrouped) ++rep.objects_regrouped;
      if (!p.obj) {
        ++rep.objects_dropped_unknown;
        continue;
      }
      l.objects.push_back(*p.obj);
    }
    if (room.contains("door_candidates")) {
      const auto& doors = json_array(room, "door_candidates", where);
      for (std::size_t i = 0; i < doors.size(); ++i) {
        const ObjectParse p = parse_object(doors[i], fmt::format("{}/door_candidates/{}", where, i), taxonomy, opt);
        if (!p.obj) {
          ++rep.objects_dropped_unknown;
          continue;
        }
        const FurnObj& d = *p.obj;
        const bool near = wall_distance(d, rm.width, rm.depth) < opt.door_threshold;
        if (near && wall_aligned(d.orientation, opt.angle_tolerance)) {
          l.objects.push_back(d);
          ++rep.doors_attached;
        } else {
          ++rep.doors_rejected;
        }
      }
    }

    if (!validate(l, taxonomy).empty()) {
      ++rep.dropped_invalid;
      continue;
    }
    ++rep.imported;
    (is_validation ? validation : train).push_back(std::move(l));
  }

  Corpus c;
  c.train = std::move(train);
  c.validation = std::move(validation);
  if (!c.train.empty()) c.bounds = Corpus::compute_bounds(c.train);
  else if (!c.validation.empty()) c.bounds = Corpus::compute_bounds(c.validation);
  if (report) *report = rep;
  return c;
}

Corpus import_corpus_file(const std::string& path, const Taxonomy& taxonomy, const ImportOptions& options,
                          ImportReport* report) {
  const nlohmann::json doc = read_json_file(path);
  try {
    return import_corpus(doc, taxonomy, options, report);
  } catch (const ParseError& e) {
    throw ParseError(path + "#" + e.path(), e.what());
  }
}

nlohmann::json export_corpus(const Corpus& corpus, const Taxonomy& taxonomy) {
  nlohmann::json rooms = nlohmann::json::array();
  for (const Layout& l : corpus.train) {
    nlohmann::json j = layout_to_json(l, taxonomy);
    j["split"] = "train";
    rooms.push_back(std::move(j));
  }
  for (const Layout& l : corpus.validation) {
    nlohmann::json j = layout_to_json(l, taxonomy);
    j["split"] = "validation";
    rooms.push_back(std::move(j));
  }
  return {{"version", kInterchangeVersion}, {"rooms", std::move(rooms)}};
}

void AugmentRules::check() const {
  for (double p : {lamp_on_stand, computer_on_desk, tv_on_tv_stand})
    if (!(p >= 0.0 && p <= 1.0)) throw InputError("augmentation probabilities must lie in [0, 1]");
}

nlohmann::json AugmentRules::to_json() const {
  return {{"lamp_on_stand", lamp_on_stand},         {"computer_on_desk", computer_on_desk},
          {"tv_on_tv_stand", tv_on_tv_stand},       {"lamp_category", lamp_category},
          {"computer_category", computer_category}, {"tv_category", tv_category},
          {"tv_stand_category", tv_stand_category}};
}

AugmentRules AugmentRules::from_json(const nlohmann::json& j) {
  AugmentRules r;
  r.lamp_on_stand = j.value("lamp_on_stand", r.lamp_on_stand);
  r.computer_on_desk = j.value("computer_on_desk", r.computer_on_desk);
  r.tv_on_tv_stand = j.value("tv_on_tv_stand", r.tv_on_tv_stand);
  r.lamp_category = j.value("lamp_category", r.lamp_category);
  r.computer_category = j.value("computer_category", r.computer_category);
  r.tv_category = j.value("tv_category", r.tv_category);
  r.tv_stand_category = j.value("tv_stand_category", r.tv_stand_category);
  r.check();
  return r;
}

FurnObj centered_object(int category, double orientation, double width, double depth, Vec2 center) {
  FurnObj o{category, orientation, width, depth, 0.0, 0.0};
  const Vec2 e = extent_of(o);
  o.x = center.x - 0.5 * e.x;
  o.y = center.y - 0.5 * e.y;
  return o;
}

Layout augment(const Layout& layout, const Taxonomy& taxonomy, const AugmentRules& rules, std::uint64_t seed) {
  rules.check();
  Layout out = layout;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto lamp = taxonomy.find(rules.lamp_category);
  const auto computer = taxonomy.find(rules.computer_category);
  const auto tv = taxonomy.find(rules.tv_category);
  const auto tv_stand = taxonomy.find(rules.tv_stand_category);

  auto room_left = [&] { return static_cast<int>(out.objects.size()) < kMaxObjects; };
  for (std::size_t i = 1; i < layout.objects.size(); ++i) {
    const FurnObj& s = layout.objects[i];
    const Vec2 c = center_of(s);
    // One draw per candidate supporter keeps the stream aligned across rules.
    const double draw = u(rng);
    if (lamp && taxonomy.has(s.category, Role::kStand)) {
      if (draw < rules.lamp_on_stand && room_left()) {
        const double size = std::min({0.3, s.width, s.depth});
        out.objects.push_back(centered_object(*lamp, s.orientation, size, size, c));
      }
    } else if (computer && taxonomy.has(s.category, Role::kDesk)) {
      if (draw < rules.computer_on_desk && room_left())
        out.objects.push_back(
            centered_object(*computer, s.orientation, std::min(0.5, s.width), std::min(0.3, s.depth), c));
    } else if (tv && tv_stand && s.category == *tv_stand) {
      if (draw < rules.tv_on_tv_stand && room_left())
        out.objects.push_back(
            centered_object(*tv, s.orientation, std::min(1.2, 0.9 * s.width), std::min(0.15, s.depth), c));
    }
  }
  return out;
}

}  // namespace layoutlab
