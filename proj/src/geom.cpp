#include "layoutlab/geom.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "layoutlab/error.hpp"

namespace layoutlab {

namespace {

template <class T>
T scene_loss(const std::vector<ObjT<T>>& objs, const ExemptPairs& exempt) {
  if (objs.empty()) return T(0.0);
  const int room_cat = objs[0].category;
  std::vector<OrientedBoxT<T>> boxes;
  boxes.reserve(objs.size());
  for (const auto& o : objs) boxes.push_back(box_of(o));
  T sum(0.0);
  for (std::size_t i = 1; i < objs.size(); ++i) {
    const int ci = objs[i].category;
    if (!exempt.exempt(ci, room_cat)) sum += pair_intersection_loss(boxes[i], boxes[0], true);
    for (std::size_t j = 1; j < objs.size(); ++j) {
      if (j == i || exempt.exempt(ci, objs[j].category)) continue;
      sum += pair_intersection_loss(boxes[i], boxes[j], false);
    }
  }
  return sum;
}

template <class T>
std::vector<ObjT<T>> lift_all(const Layout& layout) {
  std::vector<ObjT<T>> out;
  out.reserve(layout.objects.size());
  for (const FurnObj& o : layout.objects) out.push_back(lift<T>(o));
  return out;
}

void seed(ObjT<Dual>& o, Attr a) {
  switch (a) {
    case Attr::kOrientation: o.orientation.d = 1.0; break;
    case Attr::kWidth: o.width.d = 1.0; break;
    case Attr::kDepth: o.depth.d = 1.0; break;
    case Attr::kX: o.x.d = 1.0; break;
    case Attr::kY: o.y.d = 1.0; break;
  }
}

double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }

}  // namespace

OrientedBox box_of(const FurnObj& o) { return box_of(lift<double>(o)); }

double signed_distance(Vec2 p, const OrientedBox& b) { return signed_distance<double>(p, b); }

double pair_intersection_loss(const FurnObj& a, const FurnObj& b, bool room_case) {
  return pair_intersection_loss<double>(box_of(a), box_of(b), room_case);
}

ExemptPairs::ExemptPairs(std::vector<std::pair<int, int>> pairs) {
  for (auto [a, b] : pairs) add(a, b);
}

void ExemptPairs::add(int a, int b) { pairs_.insert({std::min(a, b), std::max(a, b)}); }

bool ExemptPairs::exempt(int a, int b) const { return pairs_.count({std::min(a, b), std::max(a, b)}) > 0; }

ExemptPairs ExemptPairs::defaults(const Taxonomy& taxonomy) {
  ExemptPairs ex;
  const auto chairs = taxonomy.ids_with(Role::kChair);
  auto surfaces = taxonomy.ids_with(Role::kTable);
  const auto desks = taxonomy.ids_with(Role::kDesk);
  surfaces.insert(surfaces.end(), desks.begin(), desks.end());
  for (int c : chairs)
    for (int t : surfaces) ex.add(c, t);
  for (int s : taxonomy.ids_with(Role::kSupported))
    for (int t : taxonomy.ids_with(Role::kSupporting)) ex.add(s, t);
  for (int w : taxonomy.ids_with(Role::kWindow)) ex.add(w, taxonomy.room_id());
  for (int d : taxonomy.ids_with(Role::kDoor)) ex.add(d, taxonomy.room_id());
  return ex;
}

ExemptPairs ExemptPairs::from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw ParseError("", "exempt pairs must be a JSON array of [a, b] pairs");
  ExemptPairs ex;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto& p = j[i];
    if (!p.is_array() || p.size() != 2 || !p[0].is_number_integer() || !p[1].is_number_integer())
      throw ParseError("/" + std::to_string(i), "expected [int, int]");
    ex.add(p[0].get<int>(), p[1].get<int>());
  }
  return ex;
}

ExemptPairs ExemptPairs::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, "cannot open exempt-pairs file");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path, e.what());
  }
  return from_json(j);
}

nlohmann::json ExemptPairs::to_json() const {
  nlohmann::json out = nlohmann::json::array();
  for (auto [a, b] : pairs_) out.push_back({a, b});
  return out;
}

double scene_intersection_loss(const Layout& layout, const ExemptPairs& exempt) {
  return scene_loss(lift_all<double>(layout), exempt);
}

Dual scene_intersection_along(const Layout& layout, int object, Attr attr, const ExemptPairs& exempt) {
  auto objs = lift_all<Dual>(layout);
  seed(objs.at(static_cast<std::size_t>(object)), attr);
  return scene_loss(objs, exempt);
}

IntersectionReport scene_intersection_loss_grad(const Layout& layout, const ExemptPairs& exempt) {
  IntersectionReport rep;
  rep.loss = scene_intersection_loss(layout, exempt);
  rep.gradient.assign(layout.objects.size(), {});
  const auto base = lift_all<Dual>(layout);
  for (std::size_t i = 1; i < layout.objects.size(); ++i) {
    for (int a = 0; a < kNumAttrs; ++a) {
      auto objs = base;
      seed(objs[i], static_cast<Attr>(a));
      rep.gradient[i][static_cast<std::size_t>(a)] = scene_loss(objs, exempt).d;
    }
  }
  return rep;
}

std::array<Vec2, 4> corners(const OrientedBox& b) {
  const double c = std::cos(b.angle), s = std::sin(b.angle);
  const double sx[4] = {-1, 1, 1, -1};
  const double sy[4] = {-1, -1, 1, 1};
  std::array<Vec2, 4> out;
  for (int k = 0; k < 4; ++k) {
    const double lx = sx[k] * b.half.x, ly = sy[k] * b.half.y;
    out[static_cast<std::size_t>(k)] = {b.center.x + c * lx - s * ly, b.center.y + s * lx + c * ly};
  }
  return out;  // counter-clockwise
}

double convex_polygon_area(const std::vector<Vec2>& poly) {
  double a = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) a += cross(poly[i], poly[(i + 1) % poly.size()]);
  return 0.5 * std::abs(a);
}

// Sutherland-Hodgman against a counter-clockwise convex clip polygon.
std::vector<Vec2> clip_convex(const std::vector<Vec2>& subject, const std::vector<Vec2>& clip) {
  std::vector<Vec2> out = subject;
  for (std::size_t e = 0; e < clip.size() && !out.empty(); ++e) {
    const Vec2 a = clip[e], b = clip[(e + 1) % clip.size()];
    const Vec2 ab = b - a;
    auto side = [&](Vec2 p) { return cross(ab, p - a); };
    std::vector<Vec2> in = std::move(out);
    out.clear();
    for (std::size_t i = 0; i < in.size(); ++i) {
      const Vec2 p = in[i], q = in[(i + 1) % in.size()];
      const double sp = side(p), sq = side(q);
      if (sp >= 0) out.push_back(p);
      if ((sp >= 0) != (sq >= 0)) {
        const double t = sp / (sp - sq);
        out.push_back(p + t * (q - p));
      }
    }
  }
  return out;
}

double overlap_area(const OrientedBox& a, const OrientedBox& b) {
  const auto ca = corners(a), cb = corners(b);
  const std::vector<Vec2> pa(ca.begin(), ca.end()), pb(cb.begin(), cb.end());
  const auto poly = clip_convex(pa, pb);
  return poly.size() < 3 ? 0.0 : convex_polygon_area(poly);
}

bool collision_check(const Layout& layout, const FurnObj& candidate, const ExemptPairs& exempt,
                     const CollisionOptions& options) {
  const double thr = options.area_ratio_threshold;
  const OrientedBox cb = box_of(candidate);
  const double area_c = candidate.width * candidate.depth;
  if (!layout.objects.empty()) {
    const FurnObj& room = layout.objects[0];
    if (!exempt.exempt(candidate.category, room.category)) {
      const double inside = overlap_area(cb, box_of(room));
      if (area_c - inside > thr * area_c) return false;
    }
  }
  for (std::size_t j = 1; j < layout.objects.size(); ++j) {
    const FurnObj& o = layout.objects[j];
    if (exempt.exempt(candidate.category, o.category)) continue;
    const double ov = overlap_area(cb, box_of(o));
    if (ov > thr * std::min(area_c, o.width * o.depth)) return false;
  }
  return true;
}

double max_overlap_ratio(const Layout& layout, const ExemptPairs& exempt) {
  double worst = 0.0;
  for (std::size_t i = 1; i < layout.objects.size(); ++i)
    for (std::size_t j = i + 1; j < layout.objects.size(); ++j) {
      const FurnObj& a = layout.objects[i];
      const FurnObj& b = layout.objects[j];
      if (exempt.exempt(a.category, b.category)) continue;
      const double ov = overlap_area(box_of(a), box_of(b));
      worst = std::max(worst, ov / std::min(a.width * a.depth, b.width * b.depth));
    }
  return worst;
}

}  // namespace layoutlab
