#include "layoutlab/category.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "layoutlab/error.hpp"

namespace layoutlab {

namespace {

struct RoleEntry {
  Role role;
  std::string_view name;
};

constexpr RoleEntry kRoleNames[] = {
    {Role::kSeat, "seat"},
    {Role::kBed, "bed"},
    {Role::kChair, "chair"},
    {Role::kSofa, "sofa"},
    {Role::kTable, "table"},
    {Role::kDesk, "desk"},
    {Role::kStand, "stand"},
    {Role::kCeilingLight, "ceiling-light"},
    {Role::kStandingLight, "standing-light"},
    {Role::kTv, "tv"},
    {Role::kComputer, "computer"},
    {Role::kWindow, "window"},
    {Role::kDoor, "door"},
    {Role::kSupporting, "supporting"},
    {Role::kSupported, "supported"},
    {Role::kRoom, "room"},
};

using enum Role;

std::vector<Category> builtin_categories() {
  // Ordered by canonical priority: room, wall elements, then roughly by
  // descending footprint.
  const std::vector<std::pair<std::string, RoleSet>> rows = {
      {"room", {kRoom}},
      {"door", {kDoor}},
      {"window", {kWindow}},
      {"double_bed", {kBed, kSeat}},
      {"single_bed", {kBed, kSeat}},
      {"kids_bed", {kBed, kSeat}},
      {"sofa", {kSofa, kSeat}},
      {"wardrobe", {}},
      {"dining_table", {kTable, kSupporting}},
      {"bookshelf", {}},
      {"desk", {kDesk, kSupporting}},
      {"tv_stand", {kSupporting}},
      {"coffee_table", {kTable, kSupporting}},
      {"dressing_table", {kTable, kSupporting}},
      {"cabinet", {}},
      {"children_cabinet", {}},
      {"shelf", {}},
      {"armchair", {kChair, kSeat}},
      {"lounge_chair", {kChair, kSeat}},
      {"chair", {kChair, kSeat}},
      {"dining_chair", {kChair, kSeat}},
      {"stool", {kChair, kSeat}},
      {"nightstand", {kStand, kSupporting}},
      {"side_table", {kStand, kSupporting}},
      {"ceiling_lamp", {kCeilingLight}},
      {"pendant_lamp", {kCeilingLight}},
      {"floor_lamp", {kStandingLight}},
      {"plant", {}},
      {"tv", {kTv, kSupported}},
      {"computer", {kComputer, kSupported}},
      {"indoor_lamp", {kStandingLight, kSupported}},
  };
  std::vector<Category> out;
  out.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.push_back({static_cast<int>(i), rows[i].first, rows[i].second, static_cast<int>(i)});
  }
  return out;
}

}  // namespace

std::string_view role_name(Role r) {
  for (const auto& e : kRoleNames)
    if (e.role == r) return e.name;
  return "?";
}

std::optional<Role> role_from_name(std::string_view name) {
  for (const auto& e : kRoleNames)
    if (e.name == name) return e.role;
  return std::nullopt;
}

const std::vector<Role>& all_roles() {
  static const std::vector<Role> roles = [] {
    std::vector<Role> v;
    for (const auto& e : kRoleNames) v.push_back(e.role);
    return v;
  }();
  return roles;
}

Taxonomy::Taxonomy(std::vector<Category> categories) : categories_(std::move(categories)) {
  std::sort(categories_.begin(), categories_.end(),
            [](const Category& a, const Category& b) { return a.id < b.id; });
  check_invariants();
}

void Taxonomy::check_invariants() const {
  int rooms = 0;
  for (std::size_t i = 0; i < categories_.size(); ++i) {
    const Category& c = categories_[i];
    const std::string where = "/" + std::to_string(i);
    if (c.id != static_cast<int>(i)) throw ParseError(where + "/id", "category ids must be dense 0..C-1");
    if (c.name.empty()) throw ParseError(where + "/name", "empty category name");
    for (std::size_t j = 0; j < i; ++j)
      if (categories_[j].name == c.name) throw ParseError(where + "/name", "duplicate category name " + c.name);
    const RoleSet& r = c.roles;
    if ((r.has(Role::kBed) || r.has(Role::kChair) || r.has(Role::kSofa)) && !r.has(Role::kSeat))
      throw ParseError(where + "/roles", "bed/chair/sofa categories must also be seats");
    if (r.has(Role::kRoom)) ++rooms;
  }
  if (rooms != 1) throw ParseError("", "exactly one category must have the room role");
}

const Taxonomy& Taxonomy::builtin() {
  static const Taxonomy t(builtin_categories());
  return t;
}

Taxonomy Taxonomy::from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw ParseError("", "taxonomy must be a JSON array");
  std::vector<Category> cats;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto& e = j[i];
    const std::string where = "/" + std::to_string(i);
    if (!e.is_object()) throw ParseError(where, "expected object");
    Category c;
    try {
      c.id = e.at("id").get<int>();
      c.name = e.at("name").get<std::string>();
    } catch (const nlohmann::json::exception& ex) {
      throw ParseError(where, ex.what());
    }
    if (e.contains("roles")) {
      const auto& roles = e["roles"];
      if (!roles.is_array()) throw ParseError(where + "/roles", "expected array");
      for (std::size_t k = 0; k < roles.size(); ++k) {
        auto r = role_from_name(roles[k].get<std::string>());
        if (!r) throw ParseError(where + "/roles/" + std::to_string(k), "unknown role " + roles[k].dump());
        c.roles.add(*r);
      }
    }
    c.priority = e.value("priority", c.id);
    cats.push_back(std::move(c));
  }
  Taxonomy t(std::move(cats));
  return t;
}

Taxonomy Taxonomy::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, "cannot open taxonomy file");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& ex) {
    throw ParseError(path, ex.what());
  }
  return from_json(j);
}

nlohmann::json Taxonomy::to_json() const {
  nlohmann::json out = nlohmann::json::array();
  for (const Category& c : categories_) {
    nlohmann::json roles = nlohmann::json::array();
    for (Role r : all_roles())
      if (c.roles.has(r)) roles.push_back(std::string(role_name(r)));
    out.push_back({{"id", c.id}, {"name", c.name}, {"roles", roles}, {"priority", c.priority}});
  }
  return out;
}

const Category& Taxonomy::at(int id) const {
  if (id < 0 || id >= size()) throw InputError("category id out of range: " + std::to_string(id));
  return categories_[static_cast<std::size_t>(id)];
}

std::optional<int> Taxonomy::find(std::string_view name) const {
  for (const Category& c : categories_)
    if (c.name == name) return c.id;
  return std::nullopt;
}

int Taxonomy::id_of(std::string_view name) const {
  if (auto id = find(name)) return *id;
  throw InputError("unknown category " + std::string(name));
}

std::vector<int> Taxonomy::ids_with(Role r) const {
  std::vector<int> out;
  for (const Category& c : categories_)
    if (c.roles.has(r)) out.push_back(c.id);
  return out;
}

void Taxonomy::set_priorities_by_area(const std::vector<double>& mean_area) {
  std::vector<int> order(categories_.size());
  std::iota(order.begin(), order.end(), 0);
  auto group = [&](int id) {
    const RoleSet& r = categories_[static_cast<std::size_t>(id)].roles;
    if (r.has(Role::kRoom)) return 0;
    if (r.has(Role::kDoor)) return 1;
    if (r.has(Role::kWindow)) return 2;
    const double a = static_cast<std::size_t>(id) < mean_area.size() ? mean_area[static_cast<std::size_t>(id)] : NAN;
    return std::isnan(a) ? 4 : 3;
  };
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    const int ga = group(a), gb = group(b);
    if (ga != gb) return ga < gb;
    if (ga == 3) return mean_area[static_cast<std::size_t>(a)] > mean_area[static_cast<std::size_t>(b)];
    return categories_[static_cast<std::size_t>(a)].priority < categories_[static_cast<std::size_t>(b)].priority;
  });
  for (std::size_t rank = 0; rank < order.size(); ++rank)
    categories_[static_cast<std::size_t>(order[rank])].priority = static_cast<int>(rank);
}

}  // namespace layoutlab
