#include "atlasburst/svg.hpp"

#include <cmath>

#include "atlasburst/json_writer.hpp"

namespace atlasburst {

namespace {

constexpr double kPi = kTwoPi / 2.0;
constexpr double kFullCircleEps = 1e-9;
constexpr double kHairlineRad = 1e-6;

std::string num(double v) { return format_fixed(v, 3); }

struct Frame {
  double cx, cy, radius;  // sunburst
  double width, height;   // icicle
};

// Point at `angle` (0 = up, clockwise on screen) and radius `r` in pixels.
std::string point(const Frame& f, double angle, double r) {
  return num(f.cx + r * std::sin(angle)) + " " + num(f.cy - r * std::cos(angle));
}

std::string arc_to(const Frame& f, double r, double to_angle, bool large, bool clockwise) {
  return "A" + num(r) + " " + num(r) + " 0 " + (large ? "1" : "0") + " " + (clockwise ? "1" : "0") + " " +
         point(f, to_angle, r);
}

std::string sector_path(const Frame& f, const NodeArc& a) {
  const double r0 = a.inner_radius * f.radius;
  const double r1 = a.outer_radius * f.radius;
  const double extent = a.end_angle - a.start_angle;
  std::string d;
  if (std::fabs(extent - kTwoPi) <= kFullCircleEps) {
    // A single arc cannot close a circle: two half arcs per ring.
    const double half = a.start_angle + kPi;
    d = "M" + point(f, a.start_angle, r1) + arc_to(f, r1, half, false, true) +
        arc_to(f, r1, a.start_angle, false, true) + "Z";
    if (r0 > 0)
      d += "M" + point(f, a.start_angle, r0) + arc_to(f, r0, half, false, false) +
           arc_to(f, r0, a.start_angle, false, false) + "Z";
    return d;
  }
  const bool large = extent >= kPi;
  d = "M" + point(f, a.start_angle, r1) + arc_to(f, r1, a.end_angle, large, true) + "L" +
      point(f, a.end_angle, r0);
  if (r0 > 0)
    d += arc_to(f, r0, a.start_angle, large, false);
  d += "Z";
  return d;
}

void open_shape_attrs(std::string& out, const RenderNode& node, StructureId id) {
  out += " fill=\"" + node.fill + "\" data-id=\"" + id.str() + "\" data-state=\"" +
         std::string(to_string(node.state)) + "\" data-name=\"" + xml_escape(node.name) + "\"";
}

void close_with_title(std::string& out, const std::string& tag, const RenderNode& node) {
  out += "><title>" + xml_escape(node.hover) + "</title></" + tag + ">\n";
}

void render_body(std::string& out, const RenderModel& model, double size) {
  const auto& g = model.geometry;
  Frame f{size / 2.0, size / 2.0, size / 2.0, size, size};
  for (std::size_t i = 0; i < model.nodes.size(); ++i) {
    const RenderNode& node = model.nodes[i];
    if (g.kind == LayoutKind::sunburst) {
      const NodeArc& a = g.arcs[i];
      const double extent = a.end_angle - a.start_angle;
      if (a.inner_radius <= 0 && std::fabs(extent - kTwoPi) <= kFullCircleEps) {
        out += "<circle cx=\"" + num(f.cx) + "\" cy=\"" + num(f.cy) + "\" r=\"" +
               num(a.outer_radius * f.radius) + "\"";
        open_shape_attrs(out, node, a.id);
        close_with_title(out, "circle", node);
        continue;
      }
      out += "<path d=\"" + sector_path(f, a) + "\"";
      if (std::fabs(extent - kTwoPi) <= kFullCircleEps) out += " fill-rule=\"evenodd\"";
      open_shape_attrs(out, node, a.id);
      // Sub-pixel sectors keep a hairline stroke so they stay visible.
      if (extent < kHairlineRad) out += " stroke=\"" + node.fill + "\" stroke-width=\"0.5\"";
      close_with_title(out, "path", node);
    } else {
      const NodeRect& r = g.rects[i];
      out += "<rect x=\"" + num(r.x0 * f.width) + "\" y=\"" + num(r.y0 * f.height) + "\" width=\"" +
             num((r.x1 - r.x0) * f.width) + "\" height=\"" + num((r.y1 - r.y0) * f.height) + "\"";
      open_shape_attrs(out, node, r.id);
      close_with_title(out, "rect", node);
    }
  }
  for (const auto& label : model.labels) {
    double x = g.kind == LayoutKind::sunburst ? f.cx + label.x * f.radius : label.x * f.width;
    double y = g.kind == LayoutKind::sunburst ? f.cy + label.y * f.radius : label.y * f.height;
    out += "<text x=\"" + num(x) + "\" y=\"" + num(y) +
           "\" text-anchor=\"middle\" dominant-baseline=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"10\" pointer-events=\"none\" data-id=\"" +
           label.id.str() + "\">" + xml_escape(label.text) + "</text>\n";
  }
}

std::string header(int width, int height) {
  return "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"yes\"?>\n"
         "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" +
         std::to_string(width) + "\" height=\"" + std::to_string(height) + "\" viewBox=\"0 0 " +
         std::to_string(width) + " " + std::to_string(height) + "\">\n";
}

}  // namespace

std::string xml_escape(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      case '\n': out += "&#10;"; break;
      default:
        // Control characters are not allowed in XML 1.0.
        if (static_cast<unsigned char>(c) < 0x20 && c != '\t') break;
        out += c;
    }
  }
  return out;
}

std::string render_svg(const RenderModel& model, int size_px) {
  if (size_px <= 0) throw InvalidArgument("bad_size", "size must be positive");
  std::string out = header(size_px, size_px);
  out += "<title>" + xml_escape(model.title) + "</title>\n";
  out.reserve(model.nodes.size() * 256);
  render_body(out, model, static_cast<double>(size_px));
  out += "</svg>\n";
  return out;
}

std::string render_grid_svg(const Grid& grid, int cell_px) {
  if (cell_px <= 0) throw InvalidArgument("bad_size", "cell size must be positive");
  if (grid.models.empty()) throw InvalidArgument("empty_grid", "grid has no cells");
  const int cell_h = cell_px + kGridTitlePx;
  std::string out = header(grid.columns * cell_px, grid.rows * cell_h);
  for (std::size_t i = 0; i < grid.models.size(); ++i) {
    const auto& model = grid.models[i];
    const int x = grid.placement[i].column * cell_px;
    const int y = grid.placement[i].row * cell_h;
    out += "<g transform=\"translate(" + std::to_string(x) + "," + std::to_string(y) + ")\" data-cell=\"" +
           std::to_string(i) + "\">\n";
    out += "<text x=\"" + num(cell_px / 2.0) + "\" y=\"" + num(kGridTitlePx * 0.7) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">" + xml_escape(model.title) +
           "</text>\n";
    out += "<g transform=\"translate(0," + std::to_string(kGridTitlePx) + ")\">\n";
    render_body(out, model, static_cast<double>(cell_px));
    out += "</g>\n</g>\n";
  }
  out += "</svg>\n";
  return out;
}

}  // namespace atlasburst
