#include "atlasburst/compose.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

#include "atlasburst/json_writer.hpp"

namespace atlasburst {

bool is_hex_color(std::string_view text) {
  if (text.size() != 7 || text[0] != '#') return false;
  return std::all_of(text.begin() + 1, text.end(), [](char c) {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f') || (c >= 'A' && c <= 'F');
  });
}

Palette Palette::defaults() {
  Palette p;
  p.set(StateClass::strong, {"red", "#d62728"});
  p.set(StateClass::moderate, {"yellow", "#ffd700"});
  p.set(StateClass::weak, {"purple", "#9467bd"});
  p.set(StateClass::present, {"orange", "#ff7f0e"});
  p.set(StateClass::not_detected, {"cyan", "#17becf"});
  p.set(StateClass::propagated, {"pink", "#f7b6d2"});
  p.set(StateClass::no_info, {"grey", "#9e9e9e"});
  p.set(StateClass::not_present, {"light grey", "#e0e0e0"});
  return p;
}

Palette Palette::from_json(std::string_view text, const Palette& base) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("syntax", std::string("palette: ") + e.what(), 0, e.byte);
  }
  if (!doc.is_object()) throw ParseError("schema", "palette must be a JSON object", 0, 0);
  Palette p = base;
  for (const auto& [key, value] : doc.items()) {
    auto cls = parse_state_class(key);
    if (!cls) throw ParseError("schema", "palette: unknown state class \"" + key + "\"", 0, 0);
    if (!value.is_string() || !is_hex_color(value.get_ref<const std::string&>()))
      throw ParseError("schema", "palette: \"" + key + "\" must be a #RRGGBB string", 0, 0);
    std::string hex = to_lower_ascii(value.get<std::string>());
    p.set(*cls, {hex, hex});
  }
  return p;
}

const Color& color_of(const ExpressionState& state, const Palette& palette) {
  return palette[state_class(state)];
}

std::string hover_text(const std::string& name, const ExpressionState& state,
                       const std::optional<std::string>& source_ref) {
  std::string status;
  switch (state.kind) {
    case ExpressionState::Kind::direct:
      status = state.level == Level::not_detected ? "not detected" : std::string(to_string(state.level));
      break;
    case ExpressionState::Kind::propagated: status = "propagated"; break;
    case ExpressionState::Kind::no_info: status = "no data"; break;
    case ExpressionState::Kind::not_present: status = "not present"; break;
  }
  std::string text = name + " — " + status;
  if (source_ref) text += "\n" + *source_ref;
  return text;
}

RenderModel compose_diagram(const Anatomy& anatomy, const AnnotationStore& store, const GeneSymbol& gene,
                            Stage stage, AnatomyMode mode, LayoutKind kind, const Palette& palette) {
  LayoutParams params;
  params.kind = kind;
  return compose_diagram(anatomy, store, gene, stage, mode, params, palette);
}

RenderModel compose_diagram(const Anatomy& anatomy, const AnnotationStore& store, const GeneSymbol& gene,
                            Stage stage, AnatomyMode mode, const LayoutParams& params,
                            const Palette& palette, std::optional<StructureId> zoom_root,
                            const StateLookup& lookup) {
  const TreeView& base = mode == AnatomyMode::staged ? anatomy.staged_view(stage) : anatomy.abstract_view();
  std::optional<TreeView> zoomed;
  if (zoom_root) zoomed = subtree_view(base, *zoom_root);
  const TreeView& view = zoomed ? *zoomed : base;

  RenderModel model{gene.text() + " @ TS" + std::to_string(stage.value()),
                    gene,
                    stage,
                    mode,
                    compute_layout(view, params),
                    {},
                    {}};
  std::shared_ptr<const StateMap> cached;
  if (!zoomed && lookup) cached = lookup(gene, stage, mode);
  std::vector<ExpressionState> computed;
  if (!cached) computed = propagate_over_view(store, anatomy, view, gene, stage, mode);
  const std::vector<ExpressionState>& states = cached ? cached->states : computed;
  if (states.size() != view.size()) throw InvalidArgument("bad_states", "state map does not match the view");
  model.nodes.reserve(view.size());
  for (std::size_t i = 0; i < view.size(); ++i) {
    const Structure& s = anatomy.structure(view[i].structure);
    std::optional<std::string> ref;
    if (states[i].kind == ExpressionState::Kind::direct)
      if (const Annotation* a = store.find(gene, s.id, stage)) ref = a->source_ref;
    model.nodes.push_back({color_of(states[i], palette).hex, state_class(states[i]), s.name,
                           hover_text(s.name, states[i], ref)});
  }
  model.labels = plan_labels(view, model.geometry, anatomy);
  return model;
}

Grid compose_grid(const Anatomy& anatomy, const AnnotationStore& store, const GridSpec& spec,
                  const Palette& palette, const StateLookup& lookup) {
  if (spec.cells.empty()) throw InvalidArgument("empty_grid", "grid needs at least one cell");
  if (spec.columns < 1) throw InvalidArgument("bad_columns", "columns must be at least 1");

  LayoutParams params;
  params.kind = spec.kind;
  if (spec.mode == AnatomyMode::staged) {
    // One ring scale across the grid so stages stay comparable.
    int depth = 0;
    for (const auto& [gene, stage] : spec.cells) depth = std::max(depth, anatomy.staged_view(stage).max_depth());
    params.max_depth_hint = depth;
  }

  Grid grid;
  grid.columns = spec.columns;
  grid.rows = static_cast<int>((spec.cells.size() + static_cast<std::size_t>(spec.columns) - 1) /
                               static_cast<std::size_t>(spec.columns));
  grid.models.reserve(spec.cells.size());
  for (std::size_t i = 0; i < spec.cells.size(); ++i) {
    const auto& [gene, stage] = spec.cells[i];
    grid.models.push_back(compose_diagram(anatomy, store, gene, stage, spec.mode, params, palette, std::nullopt, lookup));
    grid.placement.push_back({static_cast<int>(i) / spec.columns, static_cast<int>(i) % spec.columns});
  }
  return grid;
}

namespace {

void write_geometry_fields(JsonWriter& w, const Geometry& g, std::size_t i) {
  if (g.kind == LayoutKind::sunburst) {
    const auto& a = g.arcs[i];
    w.key("id").value(a.id.str());
    w.key("depth").value(a.depth);
    w.key("a0").value(a.start_angle);
    w.key("a1").value(a.end_angle);
    w.key("r0").value(a.inner_radius);
    w.key("r1").value(a.outer_radius);
  } else {
    const auto& r = g.rects[i];
    w.key("id").value(r.id.str());
    w.key("depth").value(r.depth);
    w.key("x0").value(r.x0);
    w.key("x1").value(r.x1);
    w.key("y0").value(r.y0);
    w.key("y1").value(r.y1);
  }
}

void write_render_model(JsonWriter& w, const RenderModel& m) {
  w.begin_object();
  w.key("title").value(m.title);
  w.key("gene").value(m.gene.text());
  w.key("kind").value(to_string(m.kind()));
  w.key("mode").value(to_string(m.mode));
  w.key("stage").value(m.stage.value());
  w.key("nodes").begin_array();
  for (std::size_t i = 0; i < m.nodes.size(); ++i) {
    w.begin_object();
    write_geometry_fields(w, m.geometry, i);
    w.key("fill").value(m.nodes[i].fill);
    w.key("state").value(to_string(m.nodes[i].state));
    w.key("name").value(m.nodes[i].name);
    w.key("hover").value(m.nodes[i].hover);
    w.end_object();
  }
  w.end_array();
  w.key("labels").begin_array();
  for (const auto& l : m.labels) {
    w.begin_object();
    w.key("id").value(l.id.str());
    w.key("text").value(l.text);
    w.key("x").value(l.x);
    w.key("y").value(l.y);
    w.key("orientation").value(l.orientation);
    w.end_object();
  }
  w.end_array();
  w.end_object();
}

}  // namespace

std::string geometry_document(const Geometry& geometry, AnatomyMode mode, std::optional<Stage> stage) {
  JsonWriter w;
  w.begin_object();
  w.key("kind").value(to_string(geometry.kind));
  w.key("mode").value(to_string(mode));
  if (mode == AnatomyMode::staged && stage) w.key("stage").value(stage->value());
  w.key("nodes").begin_array();
  for (std::size_t i = 0; i < geometry.size(); ++i) {
    w.begin_object();
    write_geometry_fields(w, geometry, i);
    w.end_object();
  }
  w.end_array();
  w.end_object();
  return w.take();
}

std::string render_model_document(const RenderModel& model) {
  JsonWriter w;
  write_render_model(w, model);
  return w.take();
}

std::string grid_document(const Grid& grid) {
  JsonWriter w;
  w.begin_object();
  w.key("columns").value(grid.columns);
  w.key("rows").value(grid.rows);
  w.key("cells").begin_array();
  for (std::size_t i = 0; i < grid.models.size(); ++i) {
    w.begin_object();
    w.key("row").value(grid.placement[i].row);
    w.key("col").value(grid.placement[i].column);
    w.key("gene").value(grid.models[i].gene.text());
    w.key("stage").value(grid.models[i].stage.value());
    w.key("model");
    write_render_model(w, grid.models[i]);
    w.end_object();
  }
  w.end_array();
  w.end_object();
  return w.take();
}

}  // namespace atlasburst
