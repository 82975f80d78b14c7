#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "layoutlab/category.hpp"
#include "layoutlab/dual.hpp"

namespace layoutlab {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr int kMaxObjects = 21;  // room included
inline constexpr int kTupleSize = 6;

// Continuous attributes in tuple order after the category.
enum class Attr : int { kOrientation = 0, kWidth = 1, kDepth = 2, kX = 3, kY = 4 };
inline constexpr int kNumAttrs = 5;

// One furniture element. (x, y) is the bottom-left (minimum) corner of the
// object's axis-aligned bounding box; width runs along the object's local x
// axis, depth along its local y axis, and orientation rotates the local frame
// counter-clockwise. Orientation 0 faces +y.
struct FurnObj {
  int category = 0;
  double orientation = 0.0;
  double width = 0.0;
  double depth = 0.0;
  double x = 0.0;
  double y = 0.0;

  double attr(Attr a) const;
  double& attr(Attr a);

  bool operator==(const FurnObj&) const = default;
};

// Same tuple over an arbitrary scalar, used by the differentiable costs.
template <class T>
struct ObjT {
  int category = 0;
  T orientation{}, width{}, depth{}, x{}, y{};

  // Axis-aligned extents of the rotated rectangle.
  Vec2T<T> extent() const {
    using std::cos;
    using std::sin;
    const T c = snapped_abs(T(cos(orientation)));
    const T s = snapped_abs(T(sin(orientation)));
    return {width * c + depth * s, width * s + depth * c};
  }
  Vec2T<T> center() const {
    const Vec2T<T> e = extent();
    return {x + T(0.5) * e.x, y + T(0.5) * e.y};
  }
  Vec2T<T> facing() const {
    using std::cos;
    using std::sin;
    return {-sin(orientation), cos(orientation)};
  }
};

template <class T>
ObjT<T> lift(const FurnObj& o) {
  return {o.category, T(o.orientation), T(o.width), T(o.depth), T(o.x), T(o.y)};
}

Vec2 center_of(const FurnObj& o);
Vec2 extent_of(const FurnObj& o);
Vec2 facing_of(const FurnObj& o);

struct Layout {
  std::vector<FurnObj> objects;  // objects[0] is the room
  std::string source_id;
  std::string room_type;

  const FurnObj& room() const { return objects.front(); }
  std::size_t furniture_count() const { return objects.empty() ? 0 : objects.size() - 1; }

  bool operator==(const Layout&) const = default;
};

struct DatasetBounds {
  double w_min = 0.0, w_max = 0.0;
  double d_min = 0.0, d_max = 0.0;

  bool valid() const { return w_min < w_max && d_min < d_max; }
  bool operator==(const DatasetBounds&) const = default;
};

struct Violation {
  int index = -1;  // object index, -1 for layout-level problems
  std::string what;

  bool operator==(const Violation&) const = default;
};

// Empty iff every layout invariant holds.
std::vector<Violation> validate(const Layout& layout, const Taxonomy& taxonomy);

// Room first, then furniture by category priority. Same-category runs are put
// in a seed-dependent order that depends only on the run's contents, so the
// operation is idempotent for a fixed seed.
Layout canonical_order(const Layout& layout, const Taxonomy& taxonomy, std::uint64_t seed);

// Mean footprint area per category id (NaN where the category never occurs).
std::vector<double> mean_footprint_area(const std::vector<Layout>& layouts, int num_categories);

// Room-only layout of the given size.
Layout empty_room(double width, double depth, int room_category);

}  // namespace layoutlab
