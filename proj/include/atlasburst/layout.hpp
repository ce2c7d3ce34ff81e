#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "atlasburst/anatomy.hpp"

namespace atlasburst {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

enum class LayoutKind : std::uint8_t { sunburst, icicle };

std::string_view to_string(LayoutKind kind);
LayoutKind parse_layout_kind(std::string_view text);

// Subtree leaf count per view node (leaf = 1, internal = sum of children).
using WeightMap = std::vector<double>;

struct NodeArc {
  StructureId id;
  int depth = 0;
  double start_angle = 0;  // radians, 0 at 12 o'clock, increasing clockwise
  double end_angle = 0;
  double inner_radius = 0;  // unit disc
  double outer_radius = 0;
};

struct NodeRect {
  StructureId id;
  int depth = 0;
  double x0 = 0, x1 = 0;
  double y0 = 0, y1 = 0;  // y grows downward from the root band
};

struct LayoutParams {
  LayoutKind kind = LayoutKind::sunburst;
  // Reserve rings/bands for at least this depth (keeps grids at one scale).
  std::optional<int> max_depth_hint;
  // Sunburst only: draw the root as the centre disc. When false the centre
  // is left empty and every ring moves out by one band.
  bool root_disc = true;
};

// Either arcs or rects is populated, matching `kind`; order follows the view.
struct Geometry {
  LayoutKind kind = LayoutKind::sunburst;
  std::vector<NodeArc> arcs;
  std::vector<NodeRect> rects;

  std::size_t size() const { return kind == LayoutKind::sunburst ? arcs.size() : rects.size(); }
};

WeightMap compute_weights(const TreeView& view);

// Both throw InvalidArgument on an empty view or a weight map of the wrong size.
std::vector<NodeArc> sunburst_layout(const TreeView& view, const WeightMap& weights,
                                     const LayoutParams& params = {});
std::vector<NodeRect> icicle_layout(const TreeView& view, const WeightMap& weights,
                                    const LayoutParams& params = {});

Geometry compute_layout(const TreeView& view, const LayoutParams& params);

// View rooted at `new_root` holding exactly its subtree (depths rebased).
TreeView subtree_view(const TreeView& view, StructureId new_root);

// Zoom on a click: the clicked node's parent becomes the root. Clicking the
// root or a child of the root returns the view unchanged.
TreeView reroot(const TreeView& view, StructureId clicked);

struct Label {
  StructureId id;
  std::string text;
  double x = 0, y = 0;  // layout space (sunburst: centre origin, unit radius)
  std::string_view orientation = "horizontal";
};

using LabelPlan = std::vector<Label>;

// One label per major-system node, anchored at the node's area centroid.
LabelPlan plan_labels(const TreeView& view, const Geometry& geometry, const Anatomy& anatomy);

// Area centroid of an annular sector in layout space.
std::pair<double, double> arc_centroid(const NodeArc& arc);

}  // namespace atlasburst
