#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "layoutlab/category.hpp"
#include "layoutlab/layout.hpp"

namespace layoutlab {

struct CodecConfig {
  int resolution = 256;  // must be a multiple of 4
  DatasetBounds bounds;
  int max_objects = kMaxObjects;
  int num_categories = 31;
  int room_category = 0;
  std::vector<int> wall_categories;  // windows and doors, snapped to the room boundary

  static CodecConfig for_taxonomy(const Taxonomy& taxonomy, const DatasetBounds& bounds, int resolution = 256);

  int pad_token() const { return resolution; }
  int stop_token() const { return resolution + 1; }
  int vocab_size() const { return resolution + 2; }
  int max_tokens() const { return kTupleSize * max_objects; }  // 126 by default
  int sequence_length() const { return max_tokens() + 1; }     // + stop
  bool is_wall_category(int c) const;
  void check() const;  // throws InputError
  bool operator==(const CodecConfig&) const = default;
};

// Token stream plus the two parallel context streams (1-based positions and
// the 1..6 slot index within each tuple).
struct TokenSequence {
  std::vector<int> tokens;
  std::vector<int> positions;
  std::vector<int> indices;
  int clamp_events = 0;

  std::size_t size() const { return tokens.size(); }
};

// 1-based slot index for a 0-based token offset.
inline int slot_index(std::size_t offset) { return static_cast<int>(offset % kTupleSize) + 1; }

// Builds positions/indices for a bare token list.
TokenSequence make_sequence(std::vector<int> tokens);

// Number of tokens up to and including the stop token (or the full length if
// there is none).
std::size_t used_length(std::span<const int> tokens, const CodecConfig& cfg);

int quantize_orientation(double radians, int resolution);
double dequantize_orientation(double token, int resolution);

struct RoomCode {
  std::array<int, kTupleSize> tokens{};
  double cell = 0.0;     // grid cell computed from the real-valued room
  bool swapped = false;  // depth was the greater dimension
};

struct RoomDecode {
  FurnObj room;
  double cell = 0.0;
};

RoomCode encode_room(const FurnObj& room, const CodecConfig& cfg);
RoomDecode decode_room(std::span<const int> tokens, const CodecConfig& cfg);

struct FurnitureCode {
  std::array<int, kTupleSize> tokens{};
  int clamp_events = 0;
};

// Windows and doors are given depth = cell and moved so their box lies just
// outside the nearest wall of a room of size `room_size`, slid along the wall
// when they would run past a corner.
FurnObj snap_to_wall(const FurnObj& obj, Vec2 room_size, double cell);

// Quantizes a non-room object against grid cell `cell`. When `room_size` is
// provided, wall categories are snapped first.
FurnitureCode encode_furniture(const FurnObj& obj, double cell, const CodecConfig& cfg,
                               std::optional<Vec2> room_size = std::nullopt);

// Inverse of encode_furniture (without the wall snap) for one 6-token tuple.
FurnObj decode_furniture(std::span<const int> tuple, double cell, int resolution);

// Continuous inverse of the per-attribute furniture quantization, valid for
// fractional token values.
double dequantize_attribute(Attr attr, double token, double cell, int resolution);
// d(attribute)/d(token) for the same map.
double dequantize_slope(Attr attr, double cell, int resolution);

// Appends stop and pads to cfg.sequence_length().
TokenSequence encode(const Layout& layout, const CodecConfig& cfg);
Layout decode(std::span<const int> tokens, const CodecConfig& cfg);
inline Layout decode(const TokenSequence& seq, const CodecConfig& cfg) { return decode(seq.tokens, cfg); }

}  // namespace layoutlab
