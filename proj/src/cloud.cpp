#include "atlasburst/cloud.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "atlasburst/json_writer.hpp"

namespace atlasburst {

CloudModel build_cloud(const AnnotationStore& store, const Anatomy& anatomy, Stage stage,
                       std::optional<StructureId> filter) {
  const TreeView& view = anatomy.staged_view(stage);
  std::size_t lo = 0;
  std::size_t hi = view.size();
  if (filter) {
    auto pos = view.find(*filter);
    if (!pos)
      throw NotFound("unknown_structure",
                     filter->str() + " does not exist at TS" + std::to_string(stage.value()));
    lo = *pos;
    hi = view[*pos].subtree_end;
  }

  // Records are sorted by gene, so counts arrive grouped and already ordered.
  std::vector<CloudNode> nodes;
  std::uint32_t last_gene = 0;
  bool have_last = false;
  for (std::uint32_t record : store.at_stage(stage)) {
    if (filter) {
      auto pos = view.position_of_structure(store.structure_index(record));
      if (!pos || *pos < lo || *pos >= hi) continue;
    }
    const auto& gene = store.annotations()[record].gene;
    auto g = *store.gene_index(gene);
    if (!have_last || g != last_gene) {
      nodes.push_back({gene, 0, 0, 0, 0, false});
      last_gene = g;
      have_last = true;
    }
    ++nodes.back().count;
  }
  cloud_layout(nodes);
  return CloudModel{stage, filter, std::move(nodes)};
}

void cloud_layout(std::vector<CloudNode>& nodes) {
  if (nodes.empty()) return;
  const std::size_t n = nodes.size();
  auto columns = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n))));
  while (columns * columns < n) ++columns;
  while (columns > 1 && (columns - 1) * (columns - 1) >= n) --columns;
  const double cell = 1.0 / static_cast<double>(columns);
  std::size_t max_count = 0;
  for (const auto& node : nodes) max_count = std::max(max_count, node.count);
  for (std::size_t i = 0; i < n; ++i) {
    auto& node = nodes[i];
    node.x = (static_cast<double>(i % columns) + 0.5) * cell;
    node.y = (static_cast<double>(i / columns) + 0.5) * cell;
    node.radius = 0.5 * cell * std::sqrt(static_cast<double>(node.count) / static_cast<double>(max_count));
  }
}

std::vector<std::string> search_prefix(const CloudModel& cloud, std::string_view prefix) {
  const std::string key = to_lower_ascii(prefix);
  std::vector<std::string> out;
  for (const auto& node : cloud.nodes)
    if (node.gene.key().starts_with(key)) out.push_back(node.gene.text());
  return out;
}

Selection toggle_selection(const Selection& selection, const CloudModel& cloud, const GeneSymbol& gene) {
  auto in_cloud = std::any_of(cloud.nodes.begin(), cloud.nodes.end(),
                              [&](const CloudNode& n) { return n.gene == gene; });
  if (!in_cloud) throw NotFound("unknown_gene", gene.text() + " is not in the cloud");
  Selection next = selection;
  auto it = std::find(next.begin(), next.end(), gene);
  if (it != next.end())
    next.erase(it);
  else
    next.push_back(gene);
  return next;
}

void apply_selection(CloudModel& cloud, const Selection& selection) {
  for (auto& node : cloud.nodes)
    node.selected = std::find(selection.begin(), selection.end(), node.gene) != selection.end();
}

std::string cloud_document(const CloudModel& cloud) {
  JsonWriter w;
  w.begin_object();
  w.key("stage").value(cloud.stage.value());
  if (cloud.filter) w.key("filter").value(cloud.filter->str());
  w.key("nodes").begin_array();
  for (const auto& node : cloud.nodes) {
    w.begin_object();
    w.key("gene").value(node.gene.text());
    w.key("count").value(node.count);
    w.key("x").value(node.x);
    w.key("y").value(node.y);
    w.key("r").value(node.radius);
    if (node.selected) w.key("selected").value(true);
    w.end_object();
  }
  w.end_array();
  w.end_object();
  return w.take();
}

}  // namespace atlasburst
