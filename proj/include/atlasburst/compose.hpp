#pragma once

#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "atlasburst/anatomy.hpp"
#include "atlasburst/expression.hpp"
#include "atlasburst/layout.hpp"

namespace atlasburst {

struct Color {
  std::string name;
  std::string hex;  // "#rrggbb"
};

bool is_hex_color(std::string_view text);

// Fill colour for each of the eight state classes.
class Palette {
 public:
  // red / yellow / purple / cyan / pink / grey / light grey, orange for "present".
  static Palette defaults();
  // JSON object mapping state class -> "#RRGGBB"; unspecified classes keep
  // `base`. Throws ParseError on malformed text, unknown classes or bad hex.
  static Palette from_json(std::string_view text, const Palette& base = defaults());

  const Color& operator[](StateClass cls) const { return colors_[static_cast<std::size_t>(cls)]; }
  void set(StateClass cls, Color color) { colors_[static_cast<std::size_t>(cls)] = std::move(color); }

  friend bool operator==(const Palette& a, const Palette& b) {
    for (std::size_t i = 0; i < kStateClassCount; ++i)
      if (a.colors_[i].hex != b.colors_[i].hex) return false;
    return true;
  }

 private:
  std::array<Color, kStateClassCount> colors_;
};

const Color& color_of(const ExpressionState& state, const Palette& palette);

struct RenderNode {
  std::string fill;
  StateClass state = StateClass::no_info;
  std::string name;
  std::string hover;
};

struct RenderModel {
  std::string title;  // "<gene> @ TS<stage>"
  GeneSymbol gene;
  Stage stage;
  AnatomyMode mode = AnatomyMode::abstract;
  Geometry geometry;
  std::vector<RenderNode> nodes;  // parallel to geometry
  LabelPlan labels;

  LayoutKind kind() const { return geometry.kind; }
};

// Tooltip: structure name and status (level, propagated, no data or not
// present), then the source reference on its own line when known.
std::string hover_text(const std::string& name, const ExpressionState& state,
                       const std::optional<std::string>& source_ref);

RenderModel compose_diagram(const Anatomy& anatomy, const AnnotationStore& store, const GeneSymbol& gene,
                            Stage stage, AnatomyMode mode, LayoutKind kind, const Palette& palette);

// Supplies full-view state maps (e.g. from a cache) instead of recomputing.
using StateLookup =
    std::function<std::shared_ptr<const StateMap>(const GeneSymbol&, Stage, AnatomyMode)>;

// Same, with explicit layout parameters and an optional zoom root. `lookup`
// is consulted only for unzoomed diagrams.
RenderModel compose_diagram(const Anatomy& anatomy, const AnnotationStore& store, const GeneSymbol& gene,
                            Stage stage, AnatomyMode mode, const LayoutParams& params,
                            const Palette& palette, std::optional<StructureId> zoom_root = std::nullopt,
                            const StateLookup& lookup = {});

struct GridSpec {
  std::vector<std::pair<GeneSymbol, Stage>> cells;
  int columns = 1;
  AnatomyMode mode = AnatomyMode::abstract;
  LayoutKind kind = LayoutKind::sunburst;
};

struct GridPlacement {
  int row = 0;
  int column = 0;
};

struct Grid {
  int columns = 1;
  int rows = 1;
  std::vector<RenderModel> models;
  std::vector<GridPlacement> placement;  // row-major
};

// Throws InvalidArgument for an empty cell list or columns < 1.
Grid compose_grid(const Anatomy& anatomy, const AnnotationStore& store, const GridSpec& spec,
                  const Palette& palette, const StateLookup& lookup = {});

// Geometry document; "stage" is written only in staged mode so abstract
// documents are identical for every stage.
std::string geometry_document(const Geometry& geometry, AnatomyMode mode, std::optional<Stage> stage);
std::string render_model_document(const RenderModel& model);
std::string grid_document(const Grid& grid);

}  // namespace atlasburst
