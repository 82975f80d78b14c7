#include "layoutlab/json_io.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "layoutlab/error.hpp"

namespace layoutlab {

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, "cannot open file");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path, e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot open for writing: " + path);
  out << text;
  if (!out) throw InputError("write failed: " + path);
}

void write_json_file(const std::string& path, const nlohmann::json& doc, int indent) {
  write_text_file(path, doc.dump(indent) + "\n");
}

double json_number(const nlohmann::json& obj, const std::string& key, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(where + "/" + key, "missing field");
  if (!it->is_number()) throw ParseError(where + "/" + key, "expected a number");
  return it->get<double>();
}

std::string json_string(const nlohmann::json& obj, const std::string& key, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(where + "/" + key, "missing field");
  if (!it->is_string()) throw ParseError(where + "/" + key, "expected a string");
  return it->get<std::string>();
}

const nlohmann::json& json_array(const nlohmann::json& obj, const std::string& key, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(where + "/" + key, "missing field");
  if (!it->is_array()) throw ParseError(where + "/" + key, "expected an array");
  return *it;
}

nlohmann::json layout_to_json(const Layout& layout, const Taxonomy& taxonomy) {
  if (layout.objects.empty()) throw InputError("cannot serialize an empty layout");
  nlohmann::json objs = nlohmann::json::array();
  for (std::size_t i = 1; i < layout.objects.size(); ++i) {
    const FurnObj& o = layout.objects[i];
    objs.push_back({{"category", taxonomy.at(o.category).name},
                    {"orientation", o.orientation},
                    {"width", o.width},
                    {"depth", o.depth},
                    {"x", o.x},
                    {"y", o.y}});
  }
  return {{"id", layout.source_id},
          {"type", layout.room_type},
          {"width", layout.room().width},
          {"depth", layout.room().depth},
          {"objects", std::move(objs)}};
}

Layout layout_from_json(const nlohmann::json& room, const Taxonomy& taxonomy, const std::string& where) {
  if (!room.is_object()) throw ParseError(where, "expected an object");
  Layout out;
  if (room.contains("id")) {
    const auto& id = room["id"];
    out.source_id = id.is_string() ? id.get<std::string>() : id.dump();
  }
  if (room.contains("type")) out.room_type = json_string(room, "type", where);
  FurnObj r;
  r.category = taxonomy.room_id();
  r.width = json_number(room, "width", where);
  r.depth = json_number(room, "depth", where);
  out.objects.push_back(r);
  const auto& objs = json_array(room, "objects", where);
  for (std::size_t i = 0; i < objs.size(); ++i) {
    const std::string at = fmt::format("{}/objects/{}", where, i);
    const auto& o = objs[i];
    if (!o.is_object()) throw ParseError(at, "expected an object");
    FurnObj f;
    const auto cat = o.find("category");
    if (cat == o.end()) throw ParseError(at + "/category", "missing field");
    if (cat->is_number_integer()) {
      f.category = cat->get<int>();
      if (f.category < 0 || f.category >= taxonomy.size()) throw ParseError(at + "/category", "category id out of range");
    } else if (cat->is_string()) {
      const auto id = taxonomy.find(cat->get<std::string>());
      if (!id) throw ParseError(at + "/category", "unknown category '" + cat->get<std::string>() + "'");
      f.category = *id;
    } else {
      throw ParseError(at + "/category", "expected a name or id");
    }
    f.orientation = json_number(o, "orientation", at);
    f.width = json_number(o, "width", at);
    f.depth = json_number(o, "depth", at);
    f.x = json_number(o, "x", at);
    f.y = json_number(o, "y", at);
    out.objects.push_back(f);
  }
  return out;
}

nlohmann::json scenes_to_json(const std::vector<Layout>& layouts, const Taxonomy& taxonomy) {
  nlohmann::json rooms = nlohmann::json::array();
  for (const Layout& l : layouts) rooms.push_back(layout_to_json(l, taxonomy));
  return {{"version", kInterchangeVersion}, {"rooms", std::move(rooms)}};
}

std::vector<Layout> scenes_from_json(const nlohmann::json& doc, const Taxonomy& taxonomy) {
  if (!doc.is_object()) throw ParseError("", "expected a JSON object");
  const auto& rooms = json_array(doc, "rooms", "");
  std::vector<Layout> out;
  for (std::size_t i = 0; i < rooms.size(); ++i)
    out.push_back(layout_from_json(rooms[i], taxonomy, fmt::format("/rooms/{}", i)));
  return out;
}

nlohmann::json codec_to_json(const CodecConfig& cfg) {
  return {{"resolution", cfg.resolution},
          {"bounds", {{"w_min", cfg.bounds.w_min}, {"w_max", cfg.bounds.w_max}, {"d_min", cfg.bounds.d_min}, {"d_max", cfg.bounds.d_max}}},
          {"max_objects", cfg.max_objects},
          {"num_categories", cfg.num_categories},
          {"room_category", cfg.room_category},
          {"wall_categories", cfg.wall_categories}};
}

CodecConfig codec_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ParseError("/codec", "expected an object");
  CodecConfig c;
  try {
    c.resolution = j.at("resolution").get<int>();
    const auto& b = j.at("bounds");
    c.bounds = {b.at("w_min").get<double>(), b.at("w_max").get<double>(), b.at("d_min").get<double>(),
                b.at("d_max").get<double>()};
    c.max_objects = j.at("max_objects").get<int>();
    c.num_categories = j.at("num_categories").get<int>();
    c.room_category = j.at("room_category").get<int>();
    c.wall_categories = j.at("wall_categories").get<std::vector<int>>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("/codec", e.what());
  }
  c.check();
  return c;
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return fmt::format("{:016x}", h);
}

}  // namespace layoutlab
