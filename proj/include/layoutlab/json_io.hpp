#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "layoutlab/category.hpp"
#include "layoutlab/codec.hpp"
#include "layoutlab/layout.hpp"

namespace layoutlab {

inline constexpr int kInterchangeVersion = 1;

// Reads a JSON document; failures become ParseError tagged with the file.
nlohmann::json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const nlohmann::json& doc, int indent = 2);
void write_text_file(const std::string& path, const std::string& text);

// Typed field access with JSON-pointer style error locations.
double json_number(const nlohmann::json& obj, const std::string& key, const std::string& where);
std::string json_string(const nlohmann::json& obj, const std::string& key, const std::string& where);
const nlohmann::json& json_array(const nlohmann::json& obj, const std::string& key, const std::string& where);

// One room record: {id, type, width, depth, objects:[{category, orientation,
// width, depth, x, y}]}. Categories are written by name.
nlohmann::json layout_to_json(const Layout& layout, const Taxonomy& taxonomy);
// Strict inverse: unknown category names are a ParseError.
Layout layout_from_json(const nlohmann::json& room, const Taxonomy& taxonomy, const std::string& where = "");

// Single-scene document {version, rooms:[...]} used for generated scenes.
nlohmann::json scenes_to_json(const std::vector<Layout>& layouts, const Taxonomy& taxonomy);
std::vector<Layout> scenes_from_json(const nlohmann::json& doc, const Taxonomy& taxonomy);

nlohmann::json codec_to_json(const CodecConfig& cfg);
CodecConfig codec_from_json(const nlohmann::json& j);

// 64-bit FNV-1a of a string, as 16 hex digits.
std::string fnv1a_hex(const std::string& text);

}  // namespace layoutlab
