#pragma once

// Shared fixtures and independent oracles for the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "layoutlab/category.hpp"
#include "layoutlab/geom.hpp"
#include "layoutlab/layout.hpp"

namespace testing {

using namespace layoutlab;

inline double rel_err(double a, double b, double floor = 1e-6) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

inline FurnObj obj(const Taxonomy& tax, const std::string& name, double o, double w, double d, double x, double y) {
  return {tax.id_of(name), o, w, d, x, y};
}

// Object whose footprint is centered at (cx, cy).
inline FurnObj centered(const Taxonomy& tax, const std::string& name, double o, double w, double d, double cx,
                        double cy) {
  const double c = std::abs(std::cos(o)), s = std::abs(std::sin(o));
  const double ex = w * c + d * s, ey = w * s + d * c;
  return {tax.id_of(name), o, w, d, cx - 0.5 * ex, cy - 0.5 * ey};
}

inline Layout room_only(const Taxonomy& tax, double w, double d) {
  Layout l;
  l.objects.push_back({tax.room_id(), 0.0, w, d, 0.0, 0.0});
  return l;
}

// Random orientation in (-pi, pi] kept away from the cardinal directions,
// where |cos| and |sin| of the extent have kinks.
inline double generic_angle(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-kPi, kPi);
  for (;;) {
    const double o = u(rng);
    const double m = std::fmod(std::abs(o), kPi / 2);
    if (m > 0.01 && m < kPi / 2 - 0.01) return o;
  }
}

// Random scene with every activity present: seats, lights, a TV, a computer,
// a desk and a window.
inline Layout random_ergo_scene(std::mt19937_64& rng, const Taxonomy& tax) {
  std::uniform_real_distribution<double> room(3.0, 6.0), unit(0.0, 1.0);
  const double W = room(rng), D = room(rng);
  Layout l = room_only(tax, W, D);
  const std::vector<std::pair<std::string, std::pair<double, double>>> kinds = {
      {"double_bed", {1.6, 2.0}}, {"chair", {0.5, 0.5}}, {"sofa", {1.8, 0.8}},      {"desk", {1.2, 0.6}},
      {"tv_stand", {1.4, 0.4}},   {"tv", {1.0, 0.1}},    {"computer", {0.5, 0.3}},  {"floor_lamp", {0.4, 0.4}},
      {"indoor_lamp", {0.3, 0.3}}, {"window", {1.0, 0.1}}, {"ceiling_lamp", {0.5, 0.5}}, {"armchair", {0.8, 0.8}}};
  for (const auto& [name, size] : kinds) {
    if (name == "armchair" && unit(rng) < 0.5) continue;
    const double o = generic_angle(rng);
    const double cx = 0.3 + unit(rng) * (W - 0.6), cy = 0.3 + unit(rng) * (D - 0.6);
    l.objects.push_back(centered(tax, name, o, size.first, size.second, cx, cy));
  }
  return l;
}

// Random scene of `n` generic furniture objects, possibly overlapping and
// poking through the walls.
inline Layout random_geom_scene(std::mt19937_64& rng, const Taxonomy& tax, int n) {
  std::uniform_real_distribution<double> room(3.0, 6.0), unit(0.0, 1.0), size(0.3, 2.0);
  std::uniform_int_distribution<int> cat(3, tax.size() - 1);
  const double W = room(rng), D = room(rng);
  Layout l = room_only(tax, W, D);
  for (int i = 0; i < n; ++i) {
    const double o = generic_angle(rng);
    l.objects.push_back(centered(tax, tax.at(cat(rng)).name, o, size(rng), size(rng), -0.3 + unit(rng) * (W + 0.6),
                                 -0.3 + unit(rng) * (D + 0.6)));
  }
  return l;
}

// ---------------------------------------------------------------- oracles

struct P2 {
  double x, y;
};

// Corners of an object's rectangle, built from its own frame.
inline std::array<P2, 4> oracle_corners(const FurnObj& o) {
  const double c = std::cos(o.orientation), s = std::sin(o.orientation);
  const double ex = o.width * std::abs(c) + o.depth * std::abs(s);
  const double ey = o.width * std::abs(s) + o.depth * std::abs(c);
  const double cx = o.x + ex / 2, cy = o.y + ey / 2;
  const double hw = o.width / 2, hd = o.depth / 2;
  std::array<P2, 4> out;
  const double lx[4] = {-hw, hw, hw, -hw}, ly[4] = {-hd, -hd, hd, hd};
  for (int k = 0; k < 4; ++k) out[k] = {cx + c * lx[k] - s * ly[k], cy + s * lx[k] + c * ly[k]};
  return out;
}

inline double seg_dist(P2 p, P2 a, P2 b) {
  const double vx = b.x - a.x, vy = b.y - a.y;
  double t = ((p.x - a.x) * vx + (p.y - a.y) * vy) / (vx * vx + vy * vy);
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(p.x - (a.x + t * vx), p.y - (a.y + t * vy));
}

// Signed distance to a rectangle by edge distances and a half-plane test.
inline double oracle_sdf(P2 p, const FurnObj& o) {
  const auto c = oracle_corners(o);
  double d = 1e300;
  bool inside = true;
  for (int k = 0; k < 4; ++k) {
    const P2 a = c[k], b = c[(k + 1) % 4];
    d = std::min(d, seg_dist(p, a, b));
    if ((b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x) < 0) inside = false;
  }
  return inside ? -d : d;
}

inline double oracle_pair_loss(const FurnObj& a, const FurnObj& b, bool room_case) {
  const auto c = oracle_corners(a);
  const P2 ctr{(c[0].x + c[2].x) / 2, (c[0].y + c[2].y) / 2};
  std::vector<std::pair<P2, double>> pts = {{ctr, 16.0}};
  for (int k = 0; k < 4; ++k) {
    const P2 m{(c[k].x + c[(k + 1) % 4].x) / 2, (c[k].y + c[(k + 1) % 4].y) / 2};
    pts.push_back({m, 4.0});
    pts.push_back({c[k], 1.0});
  }
  double sum = 0.0;
  for (const auto& [p, w] : pts) {
    const double d = oracle_sdf(p, b);
    sum += w * (room_case ? std::max(d, 0.0) : std::max(-d, 0.0));
  }
  return sum / 36.0;
}

inline double oracle_scene_loss(const Layout& l, const ExemptPairs& ex) {
  double total = 0.0;
  for (std::size_t i = 1; i < l.objects.size(); ++i) {
    if (!ex.exempt(l.objects[i].category, l.objects[0].category))
      total += oracle_pair_loss(l.objects[i], l.objects[0], true);
    for (std::size_t j = 1; j < l.objects.size(); ++j)
      if (i != j && !ex.exempt(l.objects[i].category, l.objects[j].category))
        total += oracle_pair_loss(l.objects[i], l.objects[j], false);
  }
  return total;
}

// Central difference of f along one attribute.
template <class F>
double central_difference(const Layout& l, std::size_t object, Attr a, double h, F&& f) {
  Layout p = l, m = l;
  p.objects[object].attr(a) += h;
  m.objects[object].attr(a) -= h;
  return (f(p) - f(m)) / (2 * h);
}

}  // namespace testing
