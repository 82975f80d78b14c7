#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace layoutlab {

enum class Role : std::uint32_t {
  kSeat = 1u << 0,
  kBed = 1u << 1,
  kChair = 1u << 2,
  kSofa = 1u << 3,
  kTable = 1u << 4,
  kDesk = 1u << 5,
  kStand = 1u << 6,
  kCeilingLight = 1u << 7,
  kStandingLight = 1u << 8,
  kTv = 1u << 9,
  kComputer = 1u << 10,
  kWindow = 1u << 11,
  kDoor = 1u << 12,
  kSupporting = 1u << 13,
  kSupported = 1u << 14,
  kRoom = 1u << 15,
};

class RoleSet {
 public:
  constexpr RoleSet() = default;
  constexpr RoleSet(std::initializer_list<Role> roles) {
    for (Role r : roles) bits_ |= static_cast<std::uint32_t>(r);
  }

  constexpr bool has(Role r) const { return (bits_ & static_cast<std::uint32_t>(r)) != 0; }
  constexpr void add(Role r) { bits_ |= static_cast<std::uint32_t>(r); }
  constexpr std::uint32_t bits() const { return bits_; }
  constexpr bool operator==(const RoleSet&) const = default;

 private:
  std::uint32_t bits_ = 0;
};

std::string_view role_name(Role r);
std::optional<Role> role_from_name(std::string_view name);
const std::vector<Role>& all_roles();

struct Category {
  int id = 0;
  std::string name;
  RoleSet roles;
  // Canonical-order rank; lower sorts earlier. Room gets the lowest rank,
  // doors and windows follow so that a room-conditioning prefix is contiguous.
  int priority = 0;
};

// Dense id -> Category table. Exactly one category carries Role::kRoom.
class Taxonomy {
 public:
  Taxonomy() = default;
  explicit Taxonomy(std::vector<Category> categories);

  // 31-entry reconstruction of a grouped furniture taxonomy.
  static const Taxonomy& builtin();

  static Taxonomy from_json(const nlohmann::json& j);
  static Taxonomy load(const std::string& path);
  nlohmann::json to_json() const;

  int size() const { return static_cast<int>(categories_.size()); }
  const Category& at(int id) const;
  const std::vector<Category>& categories() const { return categories_; }
  std::optional<int> find(std::string_view name) const;
  int id_of(std::string_view name) const;  // throws InputError if unknown

  bool has(int id, Role r) const { return at(id).roles.has(r); }
  bool is_wall_element(int id) const { return has(id, Role::kWindow) || has(id, Role::kDoor); }
  int room_id() const { return room_id_; }
  int priority(int id) const { return at(id).priority; }

  std::vector<int> ids_with(Role r) const;

  // Reassign priorities: room, doors, windows, then remaining categories by
  // descending mean footprint area (`mean_area[id]`, NaN for unseen ones, which
  // keep their previous relative order at the end).
  void set_priorities_by_area(const std::vector<double>& mean_area);

 private:
  void check_invariants() const;

  std::vector<Category> categories_;
  int room_id_ = 0;
};

}  // namespace layoutlab
