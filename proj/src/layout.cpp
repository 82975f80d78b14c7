#include "layoutlab/layout.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <tuple>

namespace layoutlab {

double FurnObj::attr(Attr a) const {
  switch (a) {
    case Attr::kOrientation: return orientation;
    case Attr::kWidth: return width;
    case Attr::kDepth: return depth;
    case Attr::kX: return x;
    case Attr::kY: return y;
  }
  return 0.0;
}

double& FurnObj::attr(Attr a) {
  switch (a) {
    case Attr::kOrientation: return orientation;
    case Attr::kWidth: return width;
    case Attr::kDepth: return depth;
    case Attr::kX: return x;
    case Attr::kY: break;
  }
  return y;
}

Vec2 center_of(const FurnObj& o) { return lift<double>(o).center(); }
Vec2 extent_of(const FurnObj& o) { return lift<double>(o).extent(); }
Vec2 facing_of(const FurnObj& o) { return lift<double>(o).facing(); }

std::vector<Violation> validate(const Layout& layout, const Taxonomy& taxonomy) {
  std::vector<Violation> out;
  if (layout.objects.empty()) {
    out.push_back({-1, "non-empty"});
    return out;
  }
  if (static_cast<int>(layout.objects.size()) > kMaxObjects) out.push_back({-1, "count<=21"});

  for (std::size_t i = 0; i < layout.objects.size(); ++i) {
    const FurnObj& o = layout.objects[i];
    const int idx = static_cast<int>(i);
    if (o.category < 0 || o.category >= taxonomy.size()) {
      out.push_back({idx, "category-known"});
      continue;
    }
    const bool is_room = taxonomy.has(o.category, Role::kRoom);
    if (i == 0 && !is_room) out.push_back({0, "room-first"});
    if (i > 0 && is_room) out.push_back({idx, "single-room"});
    for (double v : {o.orientation, o.width, o.depth, o.x, o.y}) {
      if (!std::isfinite(v)) {
        out.push_back({idx, "finite"});
        break;
      }
    }
    if (!(o.orientation > -kPi && o.orientation <= kPi)) out.push_back({idx, "orientation-range"});
    if (!(o.width > 0.0)) out.push_back({idx, "width>0"});
    if (!(o.depth > 0.0)) out.push_back({idx, "depth>0"});
    if (i == 0 && is_room) {
      if (o.x != 0.0 || o.y != 0.0) out.push_back({0, "room-at-origin"});
      if (o.orientation != 0.0 && o.orientation != -kPi / 2) out.push_back({0, "room-orientation"});
    }
  }
  return out;
}

Layout canonical_order(const Layout& layout, const Taxonomy& taxonomy, std::uint64_t seed) {
  Layout out = layout;
  if (out.objects.size() <= 1) return out;

  auto key = [&](const FurnObj& o) {
    return std::make_tuple(taxonomy.priority(o.category), o.category, o.orientation, o.width, o.depth, o.x, o.y);
  };
  auto first = out.objects.begin();
  // The room keeps slot 0 even if it was misplaced in the input.
  auto room = std::find_if(first, out.objects.end(),
                           [&](const FurnObj& o) { return taxonomy.has(o.category, Role::kRoom); });
  if (room != out.objects.end()) std::rotate(first, room, room + 1);
  std::sort(first + 1, out.objects.end(), [&](const FurnObj& a, const FurnObj& b) { return key(a) < key(b); });

  // Seed-driven Fisher-Yates inside each same-category run.
  std::mt19937_64 rng(seed);
  auto it = first + 1;
  while (it != out.objects.end()) {
    auto run_end = std::find_if(it, out.objects.end(), [&](const FurnObj& o) { return o.category != it->category; });
    const auto n = static_cast<std::uint64_t>(run_end - it);
    for (std::uint64_t i = n; i > 1; --i) {
      const std::uint64_t j = rng() % i;
      std::swap(it[static_cast<std::ptrdiff_t>(i - 1)], it[static_cast<std::ptrdiff_t>(j)]);
    }
    it = run_end;
  }
  return out;
}

std::vector<double> mean_footprint_area(const std::vector<Layout>& layouts, int num_categories) {
  std::vector<double> sum(static_cast<std::size_t>(num_categories), 0.0);
  std::vector<int> count(static_cast<std::size_t>(num_categories), 0);
  for (const Layout& l : layouts) {
    for (std::size_t i = 1; i < l.objects.size(); ++i) {
      const FurnObj& o = l.objects[i];
      if (o.category < 0 || o.category >= num_categories) continue;
      sum[static_cast<std::size_t>(o.category)] += o.width * o.depth;
      ++count[static_cast<std::size_t>(o.category)];
    }
  }
  std::vector<double> mean(sum.size(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t c = 0; c < sum.size(); ++c)
    if (count[c] > 0) mean[c] = sum[c] / count[c];
  return mean;
}

Layout empty_room(double width, double depth, int room_category) {
  Layout l;
  l.objects.push_back({room_category, 0.0, width, depth, 0.0, 0.0});
  return l;
}

}  // namespace layoutlab
