#include "atlasburst/layout.hpp"

#include <algorithm>
#include <cmath>

namespace atlasburst {

std::string_view to_string(LayoutKind kind) {
  return kind == LayoutKind::sunburst ? "sunburst" : "icicle";
}

LayoutKind parse_layout_kind(std::string_view text) {
  if (text == "sunburst") return LayoutKind::sunburst;
  if (text == "icicle") return LayoutKind::icicle;
  throw InvalidArgument("bad_kind", "kind must be 'sunburst' or 'icicle', got '" + std::string(text) + "'");
}

WeightMap compute_weights(const TreeView& view) {
  const std::size_t n = view.size();
  WeightMap weights(n, 0.0);
  for (std::size_t i = n; i-- > 0;) {
    if (view[i].subtree_end == i + 1) weights[i] = 1.0;
    int p = view[i].parent;
    if (p >= 0) weights[static_cast<std::size_t>(p)] += weights[i];
  }
  return weights;
}

namespace {

struct Interval {
  double lo = 0;
  double hi = 0;
};

// Unit-interval partition: each child takes a share of its parent's interval
// proportional to weight, siblings in view order. Boundaries between
// consecutive siblings are computed once, so neighbours meet exactly and the
// last child ends exactly where its parent does.
std::vector<Interval> partition(const TreeView& view, const WeightMap& weights) {
  if (view.empty()) throw InvalidArgument("empty_view", "cannot lay out an empty view");
  if (weights.size() != view.size())
    throw InvalidArgument("bad_weights", "weight map does not match the view");
  std::vector<Interval> out(view.size());
  out[0] = {0.0, 1.0};
  for (std::size_t i = 0; i < view.size(); ++i) {
    const Interval parent = out[i];
    const double span = parent.hi - parent.lo;
    double total = 0;
    view.for_each_child(i, [&](std::size_t c) { total += weights[c]; });
    if (total <= 0) continue;
    double cumulative = 0;
    double start = parent.lo;
    std::size_t last = 0;
    view.for_each_child(i, [&](std::size_t c) {
      cumulative += weights[c];
      double end = parent.lo + span * (cumulative / total);
      out[c] = {start, end};
      start = end;
      last = c;
    });
    out[last].hi = parent.hi;
  }
  return out;
}

int band_count(const TreeView& view, const LayoutParams& params) {
  int depth = view.max_depth();
  if (params.max_depth_hint) depth = std::max(depth, *params.max_depth_hint);
  return depth + 1;
}

}  // namespace

std::vector<NodeArc> sunburst_layout(const TreeView& view, const WeightMap& weights,
                                     const LayoutParams& params) {
  auto unit = partition(view, weights);
  const int offset = params.root_disc ? 0 : 1;
  const double band = 1.0 / static_cast<double>(band_count(view, params) + offset);
  std::vector<NodeArc> arcs;
  arcs.reserve(view.size());
  for (std::size_t i = 0; i < view.size(); ++i) {
    const int depth = view[i].depth;
    NodeArc arc;
    arc.id = view[i].id;
    arc.depth = depth;
    arc.start_angle = unit[i].lo * kTwoPi;
    arc.end_angle = unit[i].hi * kTwoPi;
    arc.inner_radius = static_cast<double>(depth + offset) * band;
    arc.outer_radius = static_cast<double>(depth + offset + 1) * band;
    arcs.push_back(arc);
  }
  return arcs;
}

std::vector<NodeRect> icicle_layout(const TreeView& view, const WeightMap& weights,
                                    const LayoutParams& params) {
  auto unit = partition(view, weights);
  const double band = 1.0 / static_cast<double>(band_count(view, params));
  std::vector<NodeRect> rects;
  rects.reserve(view.size());
  for (std::size_t i = 0; i < view.size(); ++i) {
    const int depth = view[i].depth;
    rects.push_back({view[i].id, depth, unit[i].lo, unit[i].hi, depth * band, (depth + 1) * band});
  }
  return rects;
}

Geometry compute_layout(const TreeView& view, const LayoutParams& params) {
  Geometry g;
  g.kind = params.kind;
  auto weights = compute_weights(view);
  if (params.kind == LayoutKind::sunburst)
    g.arcs = sunburst_layout(view, weights, params);
  else
    g.rects = icicle_layout(view, weights, params);
  return g;
}

TreeView subtree_view(const TreeView& view, StructureId new_root) {
  const std::size_t r = view.index_of(new_root);
  const std::size_t end = view[r].subtree_end;
  const int base_depth = view[r].depth;
  std::vector<ViewNode> nodes;
  nodes.reserve(end - r);
  for (std::size_t i = r; i < end; ++i) {
    ViewNode n = view[i];
    n.depth -= base_depth;
    n.parent = i == r ? -1 : n.parent - static_cast<int>(r);
    nodes.push_back(n);
  }
  return TreeView(view.stage(), std::move(nodes), view.structure_table_size());
}

TreeView reroot(const TreeView& view, StructureId clicked) {
  const std::size_t i = view.index_of(clicked);
  const int parent = view[i].parent;
  if (parent < 0 || view[static_cast<std::size_t>(parent)].parent < 0) return view;
  return subtree_view(view, view[static_cast<std::size_t>(parent)].id);
}

std::pair<double, double> arc_centroid(const NodeArc& arc) {
  const double theta = arc.end_angle - arc.start_angle;
  const double r0 = arc.inner_radius;
  const double r1 = arc.outer_radius;
  const double radial = (2.0 / 3.0) * (r1 * r1 * r1 - r0 * r0 * r0) / (r1 * r1 - r0 * r0);
  const double half = theta / 2.0;
  const double shrink = half < 1e-12 ? 1.0 : std::sin(half) / half;
  const double d = radial * shrink;
  const double mid = arc.start_angle + half;
  return {d * std::sin(mid), -d * std::cos(mid)};
}

LabelPlan plan_labels(const TreeView& view, const Geometry& geometry, const Anatomy& anatomy) {
  if (geometry.size() != view.size())
    throw InvalidArgument("bad_geometry", "geometry does not match the view");
  LabelPlan plan;
  for (std::size_t i = 0; i < view.size(); ++i) {
    const Structure& s = anatomy.structure(view[i].structure);
    if (!s.is_major_system) continue;
    Label label;
    label.id = s.id;
    label.text = s.label();
    if (geometry.kind == LayoutKind::sunburst) {
      std::tie(label.x, label.y) = arc_centroid(geometry.arcs[i]);
    } else {
      const auto& r = geometry.rects[i];
      label.x = (r.x0 + r.x1) / 2.0;
      label.y = (r.y0 + r.y1) / 2.0;
    }
    plan.push_back(std::move(label));
  }
  return plan;
}

}  // namespace atlasburst
