#include "layoutlab/codec.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "layoutlab/error.hpp"

namespace layoutlab {

namespace {

// Nearest integer, halves rounded up.
int round_half_up(double v) { return static_cast<int>(std::floor(v + 0.5)); }

int clamp_token(int t, int resolution, int* clamp_events) {
  const int c = std::clamp(t, 0, resolution - 1);
  if (c != t && clamp_events != nullptr) ++*clamp_events;
  return c;
}

constexpr double kBoundsTolerance = 1e-9;

}  // namespace

CodecConfig CodecConfig::for_taxonomy(const Taxonomy& taxonomy, const DatasetBounds& bounds, int resolution) {
  CodecConfig cfg;
  cfg.resolution = resolution;
  cfg.bounds = bounds;
  cfg.num_categories = taxonomy.size();
  cfg.room_category = taxonomy.room_id();
  for (const Category& c : taxonomy.categories())
    if (taxonomy.is_wall_element(c.id)) cfg.wall_categories.push_back(c.id);
  cfg.check();
  return cfg;
}

bool CodecConfig::is_wall_category(int c) const {
  return std::find(wall_categories.begin(), wall_categories.end(), c) != wall_categories.end();
}

void CodecConfig::check() const {
  if (resolution < 8 || resolution % 4 != 0) throw InputError("resolution must be a multiple of 4 (and >= 8)");
  if (!bounds.valid()) throw InputError("dataset bounds must satisfy min < max");
  if (max_objects < 1) throw InputError("max_objects must be positive");
  if (num_categories < 1 || num_categories > resolution) throw InputError("category ids must fit the vocabulary");
}

TokenSequence make_sequence(std::vector<int> tokens) {
  TokenSequence s;
  s.tokens = std::move(tokens);
  s.positions.resize(s.tokens.size());
  s.indices.resize(s.tokens.size());
  for (std::size_t k = 0; k < s.tokens.size(); ++k) {
    s.positions[k] = static_cast<int>(k) + 1;
    s.indices[k] = slot_index(k);
  }
  return s;
}

std::size_t used_length(std::span<const int> tokens, const CodecConfig& cfg) {
  for (std::size_t k = 0; k < tokens.size(); ++k) {
    if (tokens[k] == cfg.stop_token()) return k + 1;
    if (tokens[k] == cfg.pad_token()) return k;
  }
  return tokens.size();
}

int quantize_orientation(double radians, int resolution) {
  if (!(radians > -kPi && radians <= kPi))
    throw InputError("orientation outside (-pi, pi]: " + std::to_string(radians));
  const double r = resolution;
  const double lo = 2.0 * kPi / r - kPi;
  const double span = 2.0 * kPi - 2.0 * kPi / r;
  return std::clamp(round_half_up((radians - lo) / span * (r - 1.0)), 0, resolution - 1);
}

double dequantize_orientation(double token, int resolution) {
  // Same affine map written as pi * k / r so cardinal tokens decode exactly.
  const double r = resolution;
  return kPi * ((2.0 * (token + 1.0) - r) / r);
}

RoomCode encode_room(const FurnObj& room, const CodecConfig& cfg) {
  const int r = cfg.resolution;
  const DatasetBounds& b = cfg.bounds;
  RoomCode code;
  code.swapped = room.width < room.depth;
  double major = room.width, minor = room.depth, lo = b.w_min, hi = b.w_max;
  if (code.swapped) {
    major = room.depth;
    minor = room.width;
    lo = b.d_min;
    hi = b.d_max;
  }
  if (major < lo - kBoundsTolerance || major > hi + kBoundsTolerance)
    throw InputError("room dimension " + std::to_string(major) + " outside dataset bounds [" + std::to_string(lo) +
                     ", " + std::to_string(hi) + "]");
  code.cell = major / (r - 2);
  const double g = code.cell;
  code.tokens[0] = room.category;
  code.tokens[1] = quantize_orientation(code.swapped ? -kPi / 2 : 0.0, r);
  code.tokens[2] = std::clamp(round_half_up((major - lo) / (hi - lo) * (r - 2)), 0, r - 2);
  code.tokens[3] = clamp_token(round_half_up((minor - g) / g), r, nullptr);
  code.tokens[4] = clamp_token(round_half_up((room.x + g) / g), r, nullptr);
  code.tokens[5] = clamp_token(round_half_up((room.y + g) / g), r, nullptr);
  return code;
}

RoomDecode decode_room(std::span<const int> tokens, const CodecConfig& cfg) {
  if (tokens.size() < static_cast<std::size_t>(kTupleSize)) throw MalformedSequence("room tuple incomplete");
  const int r = cfg.resolution;
  const DatasetBounds& b = cfg.bounds;
  const bool swapped = tokens[1] == quantize_orientation(-kPi / 2, r);
  RoomDecode out;
  out.room.category = tokens[0];
  out.room.orientation = 0.0;
  const double lo = swapped ? b.d_min : b.w_min;
  const double hi = swapped ? b.d_max : b.w_max;
  const double major = lo + static_cast<double>(tokens[2]) / (r - 2) * (hi - lo);
  const double g = major / (r - 2);
  const double minor = tokens[3] * g + g;
  out.room.width = swapped ? minor : major;
  out.room.depth = swapped ? major : minor;
  out.room.x = tokens[4] * g - g;
  out.room.y = tokens[5] * g - g;
  out.cell = g;
  return out;
}

FurnObj snap_to_wall(const FurnObj& obj, Vec2 room_size, double cell) {
  FurnObj o = obj;
  o.depth = cell;
  // Keep the center fixed while the depth changes, then push the box outward.
  const Vec2 c_old = center_of(obj);
  const Vec2 e = extent_of(o);
  o.x = c_old.x - 0.5 * e.x;
  o.y = c_old.y - 0.5 * e.y;
  const double d_bottom = c_old.y, d_top = room_size.y - c_old.y;
  const double d_left = c_old.x, d_right = room_size.x - c_old.x;
  const double m = std::min({d_bottom, d_top, d_left, d_right});
  // Slide along the wall so the object does not run past a corner.
  const auto along = [](double v, double len, double wall) { return len <= wall ? std::clamp(v, 0.0, wall - len) : v; };
  if (m == d_bottom || m == d_top) {
    o.y = m == d_bottom ? -e.y : room_size.y;
    o.x = along(o.x, e.x, room_size.x);
  } else {
    o.x = m == d_left ? -e.x : room_size.x;
    o.y = along(o.y, e.y, room_size.y);
  }
  return o;
}

FurnitureCode encode_furniture(const FurnObj& obj_in, double cell, const CodecConfig& cfg,
                               std::optional<Vec2> room_size) {
  if (!(cell > 0.0)) throw InputError("grid cell must be positive");
  const FurnObj obj = (room_size && cfg.is_wall_category(obj_in.category)) ? snap_to_wall(obj_in, *room_size, cell) : obj_in;
  const int r = cfg.resolution;
  const double g = cell;
  FurnitureCode code;
  code.tokens[0] = obj.category;
  code.tokens[1] = quantize_orientation(obj.orientation, r);
  code.tokens[2] = clamp_token(round_half_up((obj.width - g) / g), r, &code.clamp_events);
  code.tokens[3] = clamp_token(round_half_up((obj.depth - g) / g), r, &code.clamp_events);
  code.tokens[4] = clamp_token(round_half_up((obj.x + g) / g), r, &code.clamp_events);
  code.tokens[5] = clamp_token(round_half_up((obj.y + g) / g), r, &code.clamp_events);
  return code;
}

double dequantize_attribute(Attr attr, double token, double cell, int resolution) {
  switch (attr) {
    case Attr::kOrientation: return dequantize_orientation(token, resolution);
    case Attr::kWidth:
    case Attr::kDepth: return token * cell + cell;
    case Attr::kX:
    case Attr::kY: return token * cell - cell;
  }
  return 0.0;
}

double dequantize_slope(Attr attr, double cell, int resolution) {
  if (attr == Attr::kOrientation) {
    const double r = resolution;
    return (2.0 * kPi - 2.0 * kPi / r) / (r - 1.0);
  }
  return cell;
}

FurnObj decode_furniture(std::span<const int> t, double cell, int resolution) {
  if (t.size() < static_cast<std::size_t>(kTupleSize)) throw MalformedSequence("furniture tuple incomplete");
  const double g = cell;
  FurnObj o;
  o.category = t[0];
  o.orientation = dequantize_orientation(t[1], resolution);
  o.width = t[2] * g + g;
  o.depth = t[3] * g + g;
  o.x = t[4] * g - g;
  o.y = t[5] * g - g;
  return o;
}

TokenSequence encode(const Layout& layout, const CodecConfig& cfg) {
  if (layout.objects.empty()) throw InputError("cannot encode an empty layout");
  if (static_cast<int>(layout.objects.size()) > cfg.max_objects)
    throw InputError("layout has more than " + std::to_string(cfg.max_objects) + " objects");
  if (layout.objects[0].category != cfg.room_category) throw InputError("first object must be the room");

  std::vector<int> tokens;
  tokens.reserve(static_cast<std::size_t>(cfg.sequence_length()));
  const RoomCode rc = encode_room(layout.objects[0], cfg);
  tokens.insert(tokens.end(), rc.tokens.begin(), rc.tokens.end());
  // Furniture is quantized against the grid the decoder will rebuild, so the
  // round trip stays within one cell even after the room width is rounded.
  const RoomDecode rd = decode_room(rc.tokens, cfg);
  const Vec2 room_size{rd.room.width, rd.room.depth};
  int clamps = 0;
  for (std::size_t i = 1; i < layout.objects.size(); ++i) {
    const FurnitureCode fc = encode_furniture(layout.objects[i], rd.cell, cfg, room_size);
    clamps += fc.clamp_events;
    tokens.insert(tokens.end(), fc.tokens.begin(), fc.tokens.end());
  }
  tokens.push_back(cfg.stop_token());
  tokens.resize(static_cast<std::size_t>(cfg.sequence_length()), cfg.pad_token());
  TokenSequence seq = make_sequence(std::move(tokens));
  seq.clamp_events = clamps;
  return seq;
}

Layout decode(std::span<const int> tokens, const CodecConfig& cfg) {
  const int r = cfg.resolution;
  const std::size_t n = tokens.size();
  if (n < static_cast<std::size_t>(kTupleSize)) throw MalformedSequence("sequence shorter than the room tuple");
  if (tokens[0] != cfg.room_category) throw MalformedSequence("sequence must start with the room category");

  for (std::size_t k = 1; k < static_cast<std::size_t>(kTupleSize); ++k)
    if (tokens[k] < 0 || tokens[k] >= r)
      throw MalformedSequence("room attribute token out of range at offset " + std::to_string(k));

  const RoomDecode rd = decode_room(tokens.first(kTupleSize), cfg);
  Layout layout;
  layout.objects.push_back(rd.room);
  const double g = rd.cell;

  std::size_t k = kTupleSize;
  bool ended = false;
  while (k < n && !ended) {
    const int cat = tokens[k];
    if (cat == cfg.stop_token() || cat == cfg.pad_token()) {
      ended = true;
      ++k;
      break;
    }
    if (cat < 0 || cat >= cfg.num_categories || cat == cfg.room_category)
      throw MalformedSequence("invalid category token " + std::to_string(cat) + " at offset " + std::to_string(k));
    if (k + kTupleSize > n) throw MalformedSequence("truncated tuple at offset " + std::to_string(k));
    if (static_cast<int>(layout.objects.size()) >= cfg.max_objects)
      throw MalformedSequence("more than max_objects tuples");
    for (std::size_t s = 1; s < static_cast<std::size_t>(kTupleSize); ++s) {
      const int t = tokens[k + s];
      if (t < 0 || t >= r)
        throw MalformedSequence("attribute token " + std::to_string(t) + " out of range at offset " + std::to_string(k + s));
    }
    layout.objects.push_back(decode_furniture(tokens.subspan(k, kTupleSize), g, r));
    k += kTupleSize;
  }
  for (; k < n; ++k)
    if (tokens[k] != cfg.pad_token()) throw MalformedSequence("non-pad token after end of sequence at offset " + std::to_string(k));
  return layout;
}

}  // namespace layoutlab
