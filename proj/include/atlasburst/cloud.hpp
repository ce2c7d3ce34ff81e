#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "atlasburst/anatomy.hpp"
#include "atlasburst/expression.hpp"

namespace atlasburst {

struct CloudNode {
  GeneSymbol gene;
  std::size_t count = 0;  // annotations at the stage (within the filter)
  double radius = 0;
  double x = 0, y = 0;  // unit square, y down
  bool selected = false;
};

struct CloudModel {
  Stage stage;
  std::optional<StructureId> filter;
  std::vector<CloudNode> nodes;  // alphabetical (case-insensitive)
};

// One node per gene annotated at `stage`, counted within the filter's staged
// subtree when a filter is given. Throws NotFound if the filter structure
// does not exist at the stage.
CloudModel build_cloud(const AnnotationStore& store, const Anatomy& anatomy, Stage stage,
                       std::optional<StructureId> filter = std::nullopt);

// Row-major square grid with ceil(sqrt(n)) columns; radius scales with
// sqrt(count / max_count) so area tracks count.
void cloud_layout(std::vector<CloudNode>& nodes);

// Case-insensitive prefix match, in cloud order.
std::vector<std::string> search_prefix(const CloudModel& cloud, std::string_view prefix);

// Ordered set of selected genes (insertion order).
using Selection = std::vector<GeneSymbol>;

// Flips membership of `gene`. Throws NotFound if the gene is not in the cloud.
Selection toggle_selection(const Selection& selection, const CloudModel& cloud, const GeneSymbol& gene);

// Marks `selected` on cloud nodes.
void apply_selection(CloudModel& cloud, const Selection& selection);

std::string cloud_document(const CloudModel& cloud);

}  // namespace atlasburst
