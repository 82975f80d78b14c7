#include "layoutlab/ergo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "layoutlab/error.hpp"

namespace layoutlab {

namespace {

template <class T>
T pow4(const T& x) {
  const T x2 = x * x;
  return x2 * x2;
}

// <e, softmax(sign * beta * e)>; sign = -1 gives the softmin weighting.
template <class T>
T soft_aggregate(const std::vector<T>& e, double beta, double sign) {
  double shift = -std::numeric_limits<double>::infinity();
  for (const T& x : e) shift = std::max(shift, sign * beta * value_of(x));
  T num(0.0), den(0.0);
  for (const T& x : e) {
    using std::exp;
    const T w = exp(T(sign * beta) * x - T(shift));
    num += w * x;
    den += w;
  }
  return num / den;
}

template <class T>
T reach_t(const Vec2T<T>& p, const Vec2T<T>& q, const ErgoParams& prm) {
  using std::exp;
  using std::sqrt;
  const Vec2T<T> d = q - p;
  const T dist = sqrt(dot(d, d) + T(1e-18));
  return T(1.0) / (T(1.0) + exp(T(-prm.reach_sharpness) * (dist - T(prm.reach_distance))));
}

template <class T>
T visibility_t(const Vec2T<T>& p, const Vec2T<T>& u, const Vec2T<T>& q) {
  const Vec2T<T> v = safe_normalize(q - p);
  const T h = (T(1.0) + dot(u, v)) * T(0.5);
  return T(1.0) - h * h;
}

template <class T>
T lighting_t(const Vec2T<T>& p, const Vec2T<T>& q, const std::vector<Vec2T<T>>& lights, const ErgoParams& prm) {
  if (lights.empty()) return T(1.0);
  const Vec2T<T> v = safe_normalize(q - p);
  std::vector<T> e;
  e.reserve(lights.size());
  for (const auto& b : lights) {
    const Vec2T<T> l = safe_normalize(q - b);
    e.push_back(pow4(T(1.0) - (T(1.0) + dot(v, l)) * T(0.5)));
  }
  return soft_aggregate(e, prm.temperature, -1.0);
}

template <class T>
T glare_t(const Vec2T<T>& p, const Vec2T<T>& q, const std::vector<Vec2T<T>>& lights, const ErgoParams& prm) {
  if (lights.empty()) return T(0.0);
  const Vec2T<T> v = safe_normalize(q - p);
  std::vector<T> e;
  e.reserve(lights.size());
  for (const auto& b : lights) {
    const Vec2T<T> g = safe_normalize(b - p);
    e.push_back(pow4((T(1.0) + dot(v, g)) * T(0.5)));
  }
  return soft_aggregate(e, prm.temperature, 1.0);
}

template <class T>
T rescale_t(const T& cost, const ErgoParams& prm) {
  using std::log;
  return -log((T(1.0) - cost) + T(prm.epsilon));
}

struct Seat {
  std::size_t index;
  bool is_chair;
};

// Objects grouped by the role they play in the activities.
struct SceneRoles {
  std::vector<Seat> seats;
  std::vector<std::size_t> lights;        // lighting sources (ceiling, standing, windows)
  std::vector<std::size_t> glare_lights;  // same minus ceiling lights
  std::vector<std::size_t> tvs;
  std::vector<std::size_t> computers;
  std::vector<std::size_t> work_surfaces;  // tables and desks

  SceneRoles(const Layout& layout, const Taxonomy& tax) {
    for (std::size_t i = 1; i < layout.objects.size(); ++i) {
      const int c = layout.objects[i].category;
      if (c < 0 || c >= tax.size()) continue;
      const RoleSet& r = tax.at(c).roles;
      if (r.has(Role::kSeat)) seats.push_back({i, r.has(Role::kChair)});
      const bool ceiling = r.has(Role::kCeilingLight);
      const bool other_light = r.has(Role::kStandingLight) || r.has(Role::kWindow);
      if (ceiling || other_light) lights.push_back(i);
      if (other_light && !ceiling) glare_lights.push_back(i);
      if (r.has(Role::kTv)) tvs.push_back(i);
      if (r.has(Role::kComputer)) computers.push_back(i);
      if (r.has(Role::kTable) || r.has(Role::kDesk)) work_surfaces.push_back(i);
    }
  }

  bool has_chair() const {
    return std::any_of(seats.begin(), seats.end(), [](const Seat& s) { return s.is_chair; });
  }
};

template <class T>
struct Evaluation {
  std::array<std::optional<T>, kNumActivities> activity{};
  T score{0.0};
};

template <class T>
Evaluation<T> evaluate(const std::vector<ObjT<T>>& objs, const SceneRoles& roles, const ErgoParams& prm, bool scaled) {
  auto f = [&](const T& x) { return scaled ? rescale_t(x, prm) : x; };
  std::vector<Vec2T<T>> centers(objs.size());
  for (std::size_t i = 1; i < objs.size(); ++i) centers[i] = objs[i].center();
  auto gather = [&](const std::vector<std::size_t>& idx) {
    std::vector<Vec2T<T>> out;
    out.reserve(idx.size());
    for (std::size_t i : idx) out.push_back(centers[i]);
    return out;
  };
  const auto lights = gather(roles.lights);
  const auto glare_lights = gather(roles.glare_lights);

  struct SeatFrame {
    Vec2T<T> p, u, book;
    bool is_chair;
  };
  std::vector<SeatFrame> seats;
  for (const Seat& s : roles.seats) {
    const Vec2T<T> p = centers[s.index];
    const Vec2T<T> u = objs[s.index].facing();
    seats.push_back({p, u, p + T(prm.book_offset) * u, s.is_chair});
  }

  Evaluation<T> out;
  const double beta = prm.temperature;
  if (!seats.empty()) {
    std::vector<T> e;
    for (const SeatFrame& s : seats)
      e.push_back((f(lighting_t(s.p, s.book, lights, prm)) + f(glare_t(s.p, s.book, glare_lights, prm))) * T(0.5));
    out.activity[static_cast<int>(Activity::kBook)] = soft_aggregate(e, beta, -1.0);
  }
  if (!seats.empty() && !roles.tvs.empty()) {
    std::vector<T> e;
    for (const SeatFrame& s : seats)
      for (std::size_t k : roles.tvs) {
        const Vec2T<T>& q = centers[k];
        e.push_back((f(visibility_t(s.p, s.u, q)) + f(glare_t(s.p, q, glare_lights, prm))) * T(0.5));
      }
    out.activity[static_cast<int>(Activity::kTv)] = soft_aggregate(e, beta, -1.0);
  }
  if (!seats.empty() && !roles.computers.empty()) {
    std::vector<T> e;
    for (const SeatFrame& s : seats)
      for (std::size_t k : roles.computers) {
        const Vec2T<T>& q = centers[k];
        e.push_back((f(visibility_t(s.p, s.u, q)) + f(glare_t(s.p, q, glare_lights, prm)) + f(reach_t(s.p, q, prm))) /
                    T(3.0));
      }
    out.activity[static_cast<int>(Activity::kComputer)] = soft_aggregate(e, beta, -1.0);
  }
  if (roles.has_chair() && !roles.work_surfaces.empty()) {
    std::vector<T> e;
    for (const SeatFrame& s : seats) {
      if (!s.is_chair) continue;
      const T light = f(lighting_t(s.p, s.book, lights, prm));
      for (std::size_t k : roles.work_surfaces) {
        const Vec2T<T>& q = centers[k];
        e.push_back((f(visibility_t(s.p, s.u, q)) + light + f(reach_t(s.p, q, prm))) / T(3.0));
      }
    }
    out.activity[static_cast<int>(Activity::kWork)] = soft_aggregate(e, beta, -1.0);
  }

  T sum(0.0);
  int n = 0;
  for (const auto& a : out.activity)
    if (a) {
      sum += *a;
      ++n;
    }
  out.score = n > 0 ? sum / T(static_cast<double>(n)) : T(0.0);
  return out;
}

template <class T>
std::vector<ObjT<T>> lift_layout(const Layout& layout) {
  std::vector<ObjT<T>> objs;
  objs.reserve(layout.objects.size());
  for (const FurnObj& o : layout.objects) objs.push_back(lift<T>(o));
  return objs;
}

void seed_attr(ObjT<Dual>& o, Attr a) {
  switch (a) {
    case Attr::kOrientation: o.orientation.d = 1.0; break;
    case Attr::kWidth: o.width.d = 1.0; break;
    case Attr::kDepth: o.depth.d = 1.0; break;
    case Attr::kX: o.x.d = 1.0; break;
    case Attr::kY: o.y.d = 1.0; break;
  }
}

}  // namespace

void ErgoParams::check() const {
  if (!(reach_distance > 0 && reach_sharpness > 0 && temperature > 0 && epsilon > 0 && book_offset > 0))
    throw InputError("ergonomic parameters must be positive");
}

const char* activity_name(Activity a) {
  switch (a) {
    case Activity::kBook: return "read_book";
    case Activity::kTv: return "watch_tv";
    case Activity::kComputer: return "use_computer";
    case Activity::kWork: return "work_at_desk";
  }
  return "?";
}

int ErgoReport::active_count() const {
  return static_cast<int>(std::count_if(activity.begin(), activity.end(), [](const auto& a) { return a.has_value(); }));
}

double reach_cost(Vec2 p, Vec2 q, const ErgoParams& params) { return reach_t(p, q, params); }

double visibility_cost(Vec2 p, Vec2 u, Vec2 q) {
  if (p.x == q.x && p.y == q.y) throw InputError("visibility undefined for coincident viewer and target");
  return visibility_t(p, u, q);
}

double lighting_cost(Vec2 p, Vec2 q, std::span<const Vec2> lights, const ErgoParams& params) {
  return lighting_t(p, q, std::vector<Vec2>(lights.begin(), lights.end()), params);
}

double glare_cost(Vec2 p, Vec2 q, std::span<const Vec2> lights, const ErgoParams& params) {
  return glare_t(p, q, std::vector<Vec2>(lights.begin(), lights.end()), params);
}

double rescale(double cost, const ErgoParams& params) { return rescale_t(cost, params); }

double softmin_aggregate(std::span<const double> e, double beta) {
  return soft_aggregate(std::vector<double>(e.begin(), e.end()), beta, -1.0);
}

double softmax_aggregate(std::span<const double> e, double beta) {
  return soft_aggregate(std::vector<double>(e.begin(), e.end()), beta, 1.0);
}

ErgoReport activity_costs(const Layout& layout, const Taxonomy& taxonomy, const ErgoParams& params) {
  const SceneRoles roles(layout, taxonomy);
  const auto objs = lift_layout<double>(layout);
  const Evaluation<double> scaled = evaluate(objs, roles, params, true);
  const Evaluation<double> raw = evaluate(objs, roles, params, false);
  ErgoReport rep;
  rep.activity = scaled.activity;
  rep.activity_unscaled = raw.activity;
  rep.score = scaled.score;
  rep.weight_score = raw.score;
  return rep;
}

Dual scene_score_along(const Layout& layout, int object, Attr attr, const Taxonomy& taxonomy, const ErgoParams& params) {
  const SceneRoles roles(layout, taxonomy);
  auto objs = lift_layout<Dual>(layout);
  seed_attr(objs.at(static_cast<std::size_t>(object)), attr);
  return evaluate(objs, roles, params, true).score;
}

ErgoReport scene_score_grad(const Layout& layout, const Taxonomy& taxonomy, const ErgoParams& params) {
  ErgoReport rep = activity_costs(layout, taxonomy, params);
  rep.gradient.assign(layout.objects.size(), {});
  if (rep.active_count() == 0) return rep;
  const SceneRoles roles(layout, taxonomy);
  const auto base = lift_layout<Dual>(layout);
  for (std::size_t i = 1; i < layout.objects.size(); ++i) {
    for (int a = 0; a < kNumAttrs; ++a) {
      auto objs = base;
      seed_attr(objs[i], static_cast<Attr>(a));
      rep.gradient[i][static_cast<std::size_t>(a)] = evaluate(objs, roles, params, true).score.d;
    }
  }
  return rep;
}

}  // namespace layoutlab
