#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "atlasburst/errors.hpp"
#include "atlasburst/ids.hpp"

namespace atlasburst {

inline constexpr std::string_view kAnatomyFormat = "atlasburst-anatomy/1";

struct Structure {
  StructureId id;
  std::string name;
  std::optional<std::string> abbreviation;
  std::optional<StructureId> parent;  // absent only for the root
  StageSet stages;
  std::map<int, StructureId> aliases;  // stage number -> staged id
  bool is_major_system = false;
  std::vector<StructureId> isa;  // kept for display, never used for layout

  // Abbreviation when present, else the full name.
  const std::string& label() const { return abbreviation ? *abbreviation : name; }
};

// Anatomy file contents after syntax and schema checks, before any tree
// invariant is enforced. Structures keep their file order.
struct AnatomyDocument {
  StructureId root;
  std::vector<Structure> structures;
  std::vector<std::string> warnings;  // unknown keys seen in lenient mode
};

struct ParseOptions {
  bool strict = true;  // reject unknown keys instead of warning
};

AnatomyDocument read_anatomy_document(std::string_view text,
                                      const ParseOptions& options = {});

// Canonical JSON text for a document (stage runs written as "a-b" intervals).
std::string write_anatomy_document(const AnatomyDocument& doc);

enum class Severity : std::uint8_t { error, warning };

struct Finding {
  Severity severity = Severity::error;
  std::string rule;  // e.g. "ORPHAN_AT_STAGE"
  std::optional<StructureId> structure;
  std::string detail;
};

struct ValidationReport {
  std::vector<Finding> findings;

  bool empty() const { return findings.empty(); }
  std::size_t error_count() const;
  bool has_rule(std::string_view rule) const;
};

std::string_view to_string(Severity severity);

class AnatomyError : public Error {
 public:
  explicit AnatomyError(ValidationReport report);
  const ValidationReport& report() const noexcept { return report_; }

 private:
  ValidationReport report_;
};

struct ViewNode {
  StructureId id;
  std::uint32_t structure = 0;  // index into Anatomy::structures()
  int depth = 0;
  int parent = -1;  // view index of the parent, -1 for the view root
  std::uint32_t subtree_end = 0;  // one past the last descendant (preorder)
};

// A tree in preorder: either the full abstract anatomy, the restriction to one
// stage, or a zoomed subtree of either. Sibling order always follows the
// abstract tree.
class TreeView {
 public:
  TreeView() = default;
  // `nodes` must be in preorder with depth/parent filled in; subtree_end is
  // recomputed. `structure_count` sizes the structure->position table.
  TreeView(std::optional<Stage> stage, std::vector<ViewNode> nodes,
           std::size_t structure_count);

  std::optional<Stage> stage() const { return stage_; }
  std::span<const ViewNode> nodes() const { return nodes_; }
  const ViewNode& operator[](std::size_t i) const { return nodes_[i]; }
  std::size_t size() const { return nodes_.size(); }
  bool empty() const { return nodes_.empty(); }
  int max_depth() const { return max_depth_; }

  std::optional<std::size_t> find(StructureId id) const;
  std::size_t index_of(StructureId id) const;  // throws NotFound
  std::optional<std::size_t> position_of_structure(std::uint32_t structure) const;

  std::size_t descendant_count(std::size_t i) const {
    return nodes_[i].subtree_end - i - 1;
  }

  template <class F>
  void for_each_child(std::size_t i, F&& f) const {
    for (std::size_t j = i + 1; j < nodes_[i].subtree_end; j = nodes_[j].subtree_end) f(j);
  }

  std::vector<std::size_t> children(std::size_t i) const;
  std::vector<StructureId> ids() const;
  std::size_t structure_table_size() const { return by_structure_.size(); }

 private:
  std::optional<Stage> stage_;
  std::vector<ViewNode> nodes_;
  std::vector<std::int32_t> by_structure_;
  std::unordered_map<std::uint32_t, std::uint32_t> by_number_;
  int max_depth_ = 0;
};

// Validated, immutable anatomy: one abstract partOf tree plus the 26 staged
// restrictions derived from it.
class Anatomy {
 public:
  // Throws AnatomyError when validation reports any error-severity finding.
  static Anatomy from_document(AnatomyDocument doc);

  StructureId root() const { return structures_.front().id; }
  std::size_t size() const { return structures_.size(); }

  // Abstract preorder; index i matches abstract_view()[i].structure.
  std::span<const Structure> structures() const { return structures_; }
  const Structure& structure(std::uint32_t index) const { return structures_[index]; }
  const Structure& structure(StructureId id) const;  // throws NotFound
  std::optional<std::uint32_t> find(StructureId id) const;

  const TreeView& abstract_view() const { return abstract_view_; }
  const TreeView& staged_view(Stage stage) const {
    return staged_views_[static_cast<std::size_t>(stage.value() - kMinStage)];
  }

  StructureId resolve_alias(StructureId staged) const;  // throws NotFound
  bool exists_at(std::uint32_t index, Stage stage) const {
    return structures_[index].stages.contains(stage);
  }

  AnatomyDocument to_document() const;
  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  Anatomy() = default;

  std::vector<Structure> structures_;
  std::unordered_map<std::uint32_t, std::uint32_t> by_number_;
  std::unordered_map<std::uint32_t, std::uint32_t> alias_owner_;  // EMAP number -> index
  TreeView abstract_view_;
  std::vector<TreeView> staged_views_;
  std::vector<std::string> warnings_;
};

// Parse + validate in one step.
Anatomy parse_anatomy(std::string_view text, const ParseOptions& options = {});

ValidationReport validate_anatomy(const AnatomyDocument& doc);
ValidationReport validate_anatomy(const Anatomy& anatomy);

inline const TreeView& staged_view(const Anatomy& anatomy, Stage stage) {
  return anatomy.staged_view(stage);
}
inline const TreeView& abstract_view(const Anatomy& anatomy) {
  return anatomy.abstract_view();
}
inline StructureId resolve_alias(const Anatomy& anatomy, StructureId staged) {
  return anatomy.resolve_alias(staged);
}

// Strict descendants of `node` within `view`; throws NotFound if absent.
std::size_t descendant_count(const TreeView& view, StructureId node);

// Case-insensitive (ASCII) comparison used for sibling order and gene symbols.
int compare_ignore_case(std::string_view a, std::string_view b);
std::string to_lower_ascii(std::string_view s);

}  // namespace atlasburst
