#include "layoutlab/svg.hpp"

#include <fmt/format.h>

#include "layoutlab/error.hpp"
#include "layoutlab/geom.hpp"

namespace layoutlab {

namespace {

std::string color_for(int category) {
  static constexpr const char* kPalette[] = {"#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948",
                                             "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac", "#1f77b4", "#8c564b"};
  return kPalette[static_cast<std::size_t>(category) % std::size(kPalette)];
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

SvgTransform svg_transform(const Layout& layout, const SvgStyle& style) {
  if (layout.objects.empty()) throw InputError("cannot render an empty layout");
  return {style.scale, style.margin, layout.room().depth};
}

std::string render_svg(const Layout& layout, const Taxonomy& taxonomy, const SvgStyle& style) {
  const SvgTransform tf = svg_transform(layout, style);
  const FurnObj& room = layout.room();
  const double W = room.width * style.scale + 2 * style.margin;
  const double H = room.depth * style.scale + 2 * style.margin;
  std::string svg = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.3f}\" height=\"{:.3f}\" viewBox=\"0 0 {:.3f} {:.3f}\">\n", W,
      H, W, H);
  svg += fmt::format(
      "  <rect x=\"{:.3f}\" y=\"{:.3f}\" width=\"{:.3f}\" height=\"{:.3f}\" fill=\"#fafafa\" stroke=\"#222\" "
      "stroke-width=\"2\"/>\n",
      tf.px(room.x), tf.py(room.y + room.depth), room.width * style.scale, room.depth * style.scale);

  for (std::size_t i = 1; i < layout.objects.size(); ++i) {
    const FurnObj& o = layout.objects[i];
    const std::string name = o.category >= 0 && o.category < taxonomy.size() ? taxonomy.at(o.category).name : "?";
    const bool wall = o.category >= 0 && o.category < taxonomy.size() && taxonomy.is_wall_element(o.category);
    const auto cs = corners(box_of(o));
    std::string pts;
    for (std::size_t k = 0; k < cs.size(); ++k)
      pts += fmt::format("{}{:.3f},{:.3f}", k ? " " : "", tf.px(cs[k].x), tf.py(cs[k].y));
    svg += fmt::format("  <g class=\"object\" data-index=\"{}\" data-category=\"{}\">\n", i, escape(name));
    if (wall) {
      // Wall marker: the box itself, drawn as a heavy outline.
      svg += fmt::format("    <polygon points=\"{}\" fill=\"{}\" stroke=\"{}\" stroke-width=\"4\"/>\n", pts,
                         taxonomy.has(o.category, Role::kDoor) ? "#8c564b" : "#9ecae1",
                         taxonomy.has(o.category, Role::kDoor) ? "#5b3a29" : "#3182bd");
    } else {
      svg += fmt::format("    <polygon points=\"{}\" fill=\"{}\" fill-opacity=\"0.55\" stroke=\"#333\" stroke-width=\"1\"/>\n",
                         pts, color_for(o.category));
      const Vec2 c = center_of(o);
      const Vec2 tip = c + (0.5 * o.depth) * facing_of(o);
      svg += fmt::format("    <line x1=\"{:.3f}\" y1=\"{:.3f}\" x2=\"{:.3f}\" y2=\"{:.3f}\" stroke=\"#000\" stroke-width=\"1.5\"/>\n",
                         tf.px(c.x), tf.py(c.y), tf.px(tip.x), tf.py(tip.y));
      if (style.labels)
        svg += fmt::format("    <text x=\"{:.3f}\" y=\"{:.3f}\" font-size=\"10\" text-anchor=\"middle\">{}</text>\n",
                           tf.px(c.x), tf.py(c.y), escape(name));
    }
    svg += "  </g>\n";
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace layoutlab
