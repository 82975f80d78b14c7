#pragma once

#include <string>

#include "layoutlab/category.hpp"
#include "layoutlab/layout.hpp"

namespace layoutlab {

struct SvgStyle {
  double scale = 100.0;  // pixels per meter
  double margin = 20.0;  // pixels around the room
  bool labels = true;
};

// Plan coordinates to SVG pixels; y is flipped so +y points up on screen.
struct SvgTransform {
  double scale, margin, room_depth;
  double px(double x) const { return margin + x * scale; }
  double py(double y) const { return margin + (room_depth - y) * scale; }
};

SvgTransform svg_transform(const Layout& layout, const SvgStyle& style = {});

// Top view: room rectangle, furniture outlines with a facing tick, category
// labels and wall markers for doors and windows. Byte-stable output.
std::string render_svg(const Layout& layout, const Taxonomy& taxonomy, const SvgStyle& style = {});

}  // namespace layoutlab
