#pragma once

#include <array>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "layoutlab/category.hpp"
#include "layoutlab/dual.hpp"
#include "layoutlab/layout.hpp"

namespace layoutlab {

template <class T>
struct OrientedBoxT {
  Vec2T<T> center;
  Vec2T<T> half;  // half width, half depth
  T angle{};
};
using OrientedBox = OrientedBoxT<double>;

template <class T>
OrientedBoxT<T> box_of(const ObjT<T>& o) {
  return {o.center(), {T(0.5) * o.width, T(0.5) * o.depth}, o.orientation};
}
OrientedBox box_of(const FurnObj& o);

// Signed distance: positive outside, negative inside, zero on the boundary.
template <class T>
T signed_distance(const Vec2T<T>& p, const OrientedBoxT<T>& b) {
  using std::cos;
  using std::sin;
  using std::sqrt;
  const T c = cos(b.angle), s = sin(b.angle);
  const Vec2T<T> d = p - b.center;
  // Express p in the box frame.
  const T lx = c * d.x + s * d.y;
  const T ly = -s * d.x + c * d.y;
  const T qx = snapped_abs(lx) - b.half.x;
  const T qy = snapped_abs(ly) - b.half.y;
  const T ox = max0(qx), oy = max0(qy);
  const T outside2 = ox * ox + oy * oy;
  const T outside = value_of(outside2) > 0.0 ? T(sqrt(outside2)) : T(0.0);
  const T inside = tmin(tmax(qx, qy), T(0.0));
  return outside + inside;
}
double signed_distance(Vec2 p, const OrientedBox& b);

// Sample points: center, four edge midpoints, four corners.
inline constexpr std::array<double, 9> kSampleWeights = {16, 4, 4, 4, 4, 1, 1, 1, 1};
inline constexpr double kSampleWeightSum = 36.0;

template <class T>
std::array<Vec2T<T>, 9> sample_points(const OrientedBoxT<T>& b) {
  using std::cos;
  using std::sin;
  static constexpr double kOffsets[9][2] = {{0, 0},  {1, 0},  {-1, 0}, {0, 1},  {0, -1},
                                            {1, 1},  {1, -1}, {-1, 1}, {-1, -1}};
  const T c = cos(b.angle), s = sin(b.angle);
  std::array<Vec2T<T>, 9> pts;
  for (int h = 0; h < 9; ++h) {
    const T lx = T(kOffsets[h][0]) * b.half.x;
    const T ly = T(kOffsets[h][1]) * b.half.y;
    pts[static_cast<std::size_t>(h)] = {b.center.x + c * lx - s * ly, b.center.y + s * lx + c * ly};
  }
  return pts;
}

// Object-object case (room_case = false): weighted penetration depth of
// `a`'s sample points inside `b`. Room case: weighted distance of `a`'s
// sample points outside the room box `b`.
template <class T>
T pair_intersection_loss(const OrientedBoxT<T>& a, const OrientedBoxT<T>& b, bool room_case) {
  const auto pts = sample_points(a);
  T sum(0.0);
  for (std::size_t h = 0; h < 9; ++h) {
    const T d = signed_distance(pts[h], b);
    sum += T(kSampleWeights[h]) * (room_case ? max0(d) : max0(T(-d)));
  }
  return sum / T(kSampleWeightSum);
}
double pair_intersection_loss(const FurnObj& a, const FurnObj& b, bool room_case);

// Unordered category pairs exempt from intersection terms. A pair (c, room)
// exempts category c from room containment.
class ExemptPairs {
 public:
  ExemptPairs() = default;
  explicit ExemptPairs(std::vector<std::pair<int, int>> pairs);

  // chair x {table, desk}, supported x supporting, window/door x room.
  static ExemptPairs defaults(const Taxonomy& taxonomy);
  static ExemptPairs from_json(const nlohmann::json& j);
  static ExemptPairs load(const std::string& path);
  nlohmann::json to_json() const;

  bool exempt(int a, int b) const;
  void add(int a, int b);
  std::size_t size() const { return pairs_.size(); }

 private:
  std::set<std::pair<int, int>> pairs_;
};

struct IntersectionReport {
  double loss = 0.0;
  std::vector<std::array<double, kNumAttrs>> gradient;  // empty unless requested
};

// Sum over ordered non-exempt furniture pairs plus room-containment terms.
double scene_intersection_loss(const Layout& layout, const ExemptPairs& exempt);
IntersectionReport scene_intersection_loss_grad(const Layout& layout, const ExemptPairs& exempt);
Dual scene_intersection_along(const Layout& layout, int object, Attr attr, const ExemptPairs& exempt);

// Per-sample weight derived from the intersection loss.
inline double clamp_unit(double x) { return x < 0.0 ? 0.0 : (x > 1.0 ? 1.0 : x); }

// Polygon geometry for the inference-time collision predicate.
std::array<Vec2, 4> corners(const OrientedBox& b);
double convex_polygon_area(const std::vector<Vec2>& poly);
std::vector<Vec2> clip_convex(const std::vector<Vec2>& subject, const std::vector<Vec2>& clip);
double overlap_area(const OrientedBox& a, const OrientedBox& b);

struct CollisionOptions {
  double area_ratio_threshold = 0.2;
};

// True when `candidate` may be inserted: no non-exempt object overlaps it by
// more than threshold * min(areas), and (unless exempt from room containment)
// no more than threshold of its area lies outside the room.
bool collision_check(const Layout& layout, const FurnObj& candidate, const ExemptPairs& exempt,
                     const CollisionOptions& options = {});

// Largest pairwise overlap ratio among non-exempt furniture pairs.
double max_overlap_ratio(const Layout& layout, const ExemptPairs& exempt);

}  // namespace layoutlab
