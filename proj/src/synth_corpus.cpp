#include "layoutlab/synth_corpus.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <fmt/format.h>

#include "layoutlab/error.hpp"
#include "layoutlab/geom.hpp"

namespace layoutlab {

namespace {

enum Wall : int { kBottom = 0, kRight = 1, kTop = 2, kLeft = 3 };

int opposite(int w) { return (w + 2) % 4; }

double wrap_angle(double a) {
  while (a > kPi) a -= 2.0 * kPi;
  while (a <= -kPi) a += 2.0 * kPi;
  return a;
}

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Builds one room, rejecting placements that would overlap earlier pieces.
class RoomBuilder {
 public:
  RoomBuilder(const Taxonomy& tax, std::uint64_t seed, double jitter) : tax_(tax), rng_(seed), jitter_(jitter) {}

  double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng_); }
  bool coin(double p) { return uniform(0.0, 1.0) < p; }
  int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng_); }
  double gap() { return uniform(0.0, jitter_); }

  void start(double w, double d, const std::string& type) {
    W_ = w;
    D_ = d;
    layout_ = empty_room(w, d, tax_.room_id());
    layout_.room_type = type;
  }

  double length(int wall) const { return (wall == kBottom || wall == kTop) ? W_ : D_; }

  static double facing_angle(int wall) {
    switch (wall) {
      case kBottom: return 0.0;
      case kRight: return kPi / 2;
      case kTop: return kPi;
      default: return -kPi / 2;
    }
  }

  // Point at along-wall coordinate t, `inset` meters into the room.
  Vec2 wall_point(int wall, double t, double inset) const {
    switch (wall) {
      case kBottom: return {t, inset};
      case kTop: return {t, D_ - inset};
      case kLeft: return {inset, t};
      default: return {W_ - inset, t};
    }
  }

  FurnObj against(const std::string& cat, int wall, double t, double width, double depth, double g) const {
    return centered_object(tax_.id_of(cat), facing_angle(wall), width, depth, wall_point(wall, t, g + 0.5 * depth));
  }

  FurnObj in_wall(const std::string& cat, int wall, double t, double width) const {
    return centered_object(tax_.id_of(cat), facing_angle(wall), width, 0.1, wall_point(wall, t, -0.05));
  }

  bool inside(const FurnObj& o) const {
    const Vec2 e = extent_of(o);
    return o.x >= -1e-9 && o.y >= -1e-9 && o.x + e.x <= W_ + 1e-9 && o.y + e.y <= D_ + 1e-9;
  }

  bool free(const FurnObj& c, int partner) const {
    const bool wall_c = tax_.is_wall_element(c.category);
    if (!wall_c && !inside(c)) return false;
    const OrientedBox bc = box_of(c);
    for (std::size_t i = 1; i < layout_.objects.size(); ++i) {
      if (static_cast<int>(i) == partner) continue;
      const FurnObj& o = layout_.objects[i];
      if (wall_c != tax_.is_wall_element(o.category)) continue;
      if (overlap_area(bc, box_of(o)) > 1e-6) return false;
    }
    return true;
  }

  int add(const FurnObj& c, int partner = -1) {
    if (static_cast<int>(layout_.objects.size()) >= kMaxObjects || !free(c, partner)) return -1;
    layout_.objects.push_back(c);
    return static_cast<int>(layout_.objects.size()) - 1;
  }

  // Random along-wall position; up to `tries` attempts.
  int add_on_wall(const std::string& cat, int wall, double width, double depth, int tries = 25) {
    const double L = length(wall);
    if (width > L - 0.1) return -1;
    for (int k = 0; k < tries; ++k) {
      const double t = uniform(0.5 * width + 0.05, L - 0.5 * width - 0.05);
      if (int i = add(against(cat, wall, t, width, depth, gap())); i >= 0) return i;
    }
    return -1;
  }

  int add_window_or_door(const std::string& cat, int wall, double width, std::optional<double> t0 = {}) {
    const double L = length(wall);
    width = std::min(width, L - 0.4);
    for (int k = 0; k < 25; ++k) {
      double t = t0 ? *t0 + uniform(-0.3, 0.3) : uniform(0.5 * width + 0.2, L - 0.5 * width - 0.2);
      t = std::clamp(t, 0.5 * width + 0.2, L - 0.5 * width - 0.2);
      if (int i = add(in_wall(cat, wall, t, width)); i >= 0) return i;
    }
    return -1;
  }

  int add_ceiling_lamp() {
    const double s = 0.5;
    for (int k = 0; k < 40; ++k) {
      const double spread = 0.1 + 0.05 * k;
      const Vec2 c{0.5 * W_ + uniform(-spread, spread), 0.5 * D_ + uniform(-spread, spread)};
      if (int i = add(centered_object(tax_.id_of("ceiling_lamp"), 0.0, s, s, c)); i >= 0) return i;
    }
    return -1;
  }

  // Desk against a wall with a chair pulled up to it.
  void add_desk_with_chair(int wall) {
    const int desk = add_on_wall("desk", wall, uniform(1.0, 1.4), uniform(0.55, 0.65));
    if (desk < 0) return;
    const FurnObj d = layout_.objects[static_cast<std::size_t>(desk)];
    const Vec2 u = facing_of(d);
    const Vec2 c = center_of(d) + (0.5 * d.depth + 0.15) * u;
    add(centered_object(tax_.id_of("chair"), wrap_angle(d.orientation + kPi), 0.45, 0.45, c), desk);
  }

  // Pushes one or two pieces toward a neighbour so they overlap.
  void make_sloppy(const ExemptPairs& exempt) {
    std::vector<std::size_t> movable;
    for (std::size_t i = 1; i < layout_.objects.size(); ++i)
      if (!tax_.is_wall_element(layout_.objects[i].category) &&
          !tax_.has(layout_.objects[i].category, Role::kCeilingLight))
        movable.push_back(i);
    if (movable.size() < 2) return;
    const int moves = 1 + (coin(0.5) ? 1 : 0);
    for (int m = 0; m < moves; ++m) {
      const std::size_t a = movable[static_cast<std::size_t>(pick(static_cast<int>(movable.size())))];
      std::size_t b = a;
      for (int k = 0; k < 20 && (b == a || exempt.exempt(layout_.objects[a].category, layout_.objects[b].category));
           ++k)
        b = movable[static_cast<std::size_t>(pick(static_cast<int>(movable.size())))];
      if (b == a || exempt.exempt(layout_.objects[a].category, layout_.objects[b].category)) continue;
      FurnObj& oa = layout_.objects[a];
      const Vec2 d = center_of(layout_.objects[b]) - center_of(oa);
      const double f = uniform(0.5, 0.85);
      oa.x += f * d.x;
      oa.y += f * d.y;
      // Stay inside the room so the codec keeps the overlap intact.
      const Vec2 e = extent_of(oa);
      oa.x = std::clamp(oa.x, 0.0, std::max(0.0, W_ - e.x));
      oa.y = std::clamp(oa.y, 0.0, std::max(0.0, D_ - e.y));
    }
  }

  int id(const std::string& name) const { return tax_.id_of(name); }
  Layout& layout() { return layout_; }
  double W() const { return W_; }
  double D() const { return D_; }

 private:
  const Taxonomy& tax_;
  std::mt19937_64 rng_;
  double jitter_;
  double W_ = 0.0, D_ = 0.0;
  Layout layout_;
};

void bedroom(RoomBuilder& b, bool bad) {
  b.start(b.uniform(3.0, 5.0), b.uniform(3.0, 5.0), "bedroom");
  const int bw = b.pick(4);
  const bool big = b.coin(0.7);
  const double w = big ? b.uniform(1.6, 1.8) : b.uniform(0.9, 1.0);
  const double d = big ? b.uniform(2.0, 2.1) : b.uniform(1.9, 2.0);
  const double L = b.length(bw);
  double lo = 0.5 * w + 0.6, hi = L - 0.5 * w - 0.6;
  if (lo > hi) lo = hi = 0.5 * L;
  const double t = std::clamp(0.5 * L + b.uniform(-0.4, 0.4), lo, hi);
  b.add(b.against(big ? "double_bed" : "single_bed", bw, t, w, d, b.gap()));
  const int front = opposite(bw);
  const int side = (bw + (b.coin(0.5) ? 1 : 3)) % 4;
  const int other_side = opposite(side);

  if (!bad) {
    for (int s : {-1, 1})
      b.add(b.against("nightstand", bw, t + s * (0.5 * w + 0.26 + b.gap()), 0.45, 0.4, b.gap()));
    b.add_window_or_door("window", side, b.uniform(1.0, 1.6));
    if (b.coin(0.5)) b.add_window_or_door("window", b.coin(0.5) ? other_side : bw, b.uniform(1.0, 1.6));
    b.add_window_or_door("door", b.coin(0.5) ? front : other_side, 0.9);
    b.add_on_wall("wardrobe", b.coin(0.5) ? other_side : front, b.uniform(1.0, 1.8), 0.6);
    if (b.coin(0.6)) b.add_desk_with_chair(b.coin(0.5) ? side : front);
    if (b.coin(0.5)) b.add(b.against("tv_stand", front, t + b.uniform(-0.2, 0.2), b.uniform(1.0, 1.4), 0.42, b.gap()));
  } else {
    // Window straight ahead of the bed, floor lamp in the line of sight and no
    // bedside light.
    b.add_window_or_door("window", front, b.uniform(1.0, 1.6), t);
    if (b.coin(0.4)) b.add_window_or_door("window", side, b.uniform(1.0, 1.4));
    b.add_window_or_door("door", other_side, 0.9);
    if (b.coin(0.6)) b.add(b.against("tv_stand", front, t + b.uniform(-0.2, 0.2), b.uniform(1.0, 1.4), 0.42, b.gap()));
    const double s = b.coin(0.5) ? 1.0 : -1.0;
    if (b.add(b.against("floor_lamp", front, t + s * b.uniform(0.8, 1.0), 0.4, 0.4, b.gap())) < 0)
      b.add(b.against("floor_lamp", front, t - s * b.uniform(0.8, 1.0), 0.4, 0.4, b.gap()));
    b.add_on_wall("wardrobe", other_side, b.uniform(1.0, 1.8), 0.6);
  }
  b.add_ceiling_lamp();
}

void livingroom(RoomBuilder& b, bool bad) {
  b.start(b.uniform(3.5, 6.0), b.uniform(3.5, 6.0), "livingroom");
  const int sw = b.pick(4);
  const double w = b.uniform(1.8, 2.4), d = b.uniform(0.85, 0.95);
  const double L = b.length(sw);
  const double t = std::clamp(0.5 * L + b.uniform(-0.4, 0.4), 0.5 * w + 0.6, L - 0.5 * w - 0.6);
  const int sofa = b.add(b.against("sofa", sw, t, w, d, b.gap()));
  if (sofa >= 0) {
    const FurnObj s = b.layout().objects[static_cast<std::size_t>(sofa)];
    const double ct_d = b.uniform(0.5, 0.6);
    const Vec2 c = center_of(s) + (0.5 * d + 0.4 + 0.5 * ct_d) * facing_of(s);
    b.add(centered_object(b.id("coffee_table"), s.orientation, b.uniform(1.0, 1.2), ct_d, c));
  }
  const int front = opposite(sw);
  const int side = (sw + (b.coin(0.5) ? 1 : 3)) % 4;
  const int other_side = opposite(side);
  b.add(b.against("tv_stand", front, t + b.uniform(-0.2, 0.2), b.uniform(1.2, 1.6), 0.45, b.gap()));
  if (!bad) {
    const double s = b.coin(0.5) ? 1.0 : -1.0;
    b.add(b.against("floor_lamp", sw, t + s * (0.5 * w + 0.3), 0.4, 0.4, b.gap()));
    if (b.coin(0.5)) b.add(b.against("side_table", sw, t - s * (0.5 * w + 0.32), 0.5, 0.5, b.gap()));
    b.add_window_or_door("window", side, b.uniform(1.2, 2.0));
    if (b.coin(0.5)) b.add_window_or_door("window", sw, b.uniform(1.0, 1.6));
    b.add_window_or_door("door", other_side, 0.9);
  } else {
    b.add_window_or_door("window", front, b.uniform(1.2, 2.0), t);
    const double s = b.coin(0.5) ? 1.0 : -1.0;
    if (b.add(b.against("floor_lamp", front, t + s * b.uniform(0.9, 1.1), 0.4, 0.4, b.gap())) < 0)
      b.add(b.against("floor_lamp", front, t - s * b.uniform(0.9, 1.1), 0.4, 0.4, b.gap()));
    b.add_window_or_door("door", b.coin(0.5) ? side : other_side, 0.9);
  }
  if (b.coin(0.6)) b.add_on_wall("armchair", b.coin(0.5) ? side : other_side, 0.8, 0.8);
  if (b.coin(0.5)) b.add_on_wall("bookshelf", b.coin(0.5) ? side : other_side, b.uniform(0.8, 1.2), 0.35);
  b.add_ceiling_lamp();
}

}  // namespace

void SynthOptions::check() const {
  for (double p : {bad_fraction, sloppy_fraction, validation_fraction})
    if (!(p >= 0.0 && p <= 1.0)) throw InputError("synthetic corpus fractions must lie in [0, 1]");
  if (!(jitter >= 0.0)) throw InputError("jitter must be non-negative");
}

nlohmann::json SynthOptions::to_json() const {
  return {{"bad_fraction", bad_fraction},
          {"sloppy_fraction", sloppy_fraction},
          {"validation_fraction", validation_fraction},
          {"jitter", jitter}};
}

SynthOptions SynthOptions::from_json(const nlohmann::json& j) {
  SynthOptions o;
  o.bad_fraction = j.value("bad_fraction", o.bad_fraction);
  o.sloppy_fraction = j.value("sloppy_fraction", o.sloppy_fraction);
  o.validation_fraction = j.value("validation_fraction", o.validation_fraction);
  o.jitter = j.value("jitter", o.jitter);
  o.check();
  return o;
}

const std::vector<std::string>& synth_room_types() {
  static const std::vector<std::string> types = {"bedroom", "livingroom", "mixed"};
  return types;
}

DatasetBounds synth_bounds(const std::string& room_type) {
  if (room_type == "bedroom") return {3.0, 5.0, 3.0, 5.0};
  if (room_type == "livingroom") return {3.5, 6.0, 3.5, 6.0};
  if (room_type == "mixed") return {3.0, 6.0, 3.0, 6.0};
  throw InputError("unknown synthetic room type: " + room_type);
}

Layout synth_room(const std::string& room_type, std::uint64_t seed, bool bad, bool sloppy, const Taxonomy& taxonomy,
                  double jitter) {
  RoomBuilder b(taxonomy, seed, jitter);
  if (room_type == "bedroom") bedroom(b, bad);
  else if (room_type == "livingroom") livingroom(b, bad);
  else throw InputError("unknown synthetic room type: " + room_type);
  if (sloppy) b.make_sloppy(ExemptPairs::defaults(taxonomy));
  return b.layout();
}

Corpus synth_corpus(int n, const std::string& room_type, std::uint64_t seed, const Taxonomy& taxonomy,
                    const SynthOptions& options) {
  if (n < 1) throw InputError("synthetic corpus size must be at least 1");
  options.check();
  const DatasetBounds bounds = synth_bounds(room_type);
  const int n_val = static_cast<int>(std::lround(options.validation_fraction * n));
  Corpus c;
  c.bounds = bounds;
  std::mt19937_64 flags(mix(seed));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < n; ++i) {
    const std::string type = room_type == "mixed" ? (i % 2 == 0 ? "bedroom" : "livingroom") : room_type;
    const bool bad = u(flags) < options.bad_fraction;
    const bool sloppy = u(flags) < options.sloppy_fraction;
    Layout l = synth_room(type, mix(seed ^ mix(static_cast<std::uint64_t>(i) + 1)), bad, sloppy, taxonomy,
                          options.jitter);
    l.source_id = fmt::format("{}-{:05d}", type, i);
    (i < n - n_val ? c.train : c.validation).push_back(std::move(l));
  }
  return c;
}

}  // namespace layoutlab
