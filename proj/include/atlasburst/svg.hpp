#pragma once

#include <string>
#include <string_view>

#include "atlasburst/compose.hpp"

namespace atlasburst {

// Height reserved above each grid cell for its title.
inline constexpr int kGridTitlePx = 24;

// Standalone SVG 1.1 document, `size_px` square. Sunburst nodes become
// annular-sector paths (the root disc a circle), icicle nodes rects, in
// model order. Coordinates carry 3 decimals. Throws InvalidArgument if
// size_px <= 0.
std::string render_svg(const RenderModel& model, int size_px);

// One <g> per cell at row-major offsets, each with a title line above the
// diagram. Throws InvalidArgument if cell_px <= 0 or the grid is empty.
std::string render_grid_svg(const Grid& grid, int cell_px);

std::string xml_escape(std::string_view text);

}  // namespace atlasburst
