#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "atlasburst/anatomy.hpp"
#include "atlasburst/ids.hpp"

namespace atlasburst {

// Case-preserving gene symbol; equality and ordering ignore ASCII case.
class GeneSymbol {
 public:
  explicit GeneSymbol(std::string_view text);  // throws InvalidArgument

  const std::string& text() const { return text_; }
  const std::string& key() const { return key_; }  // lower-cased

  friend bool operator==(const GeneSymbol& a, const GeneSymbol& b) { return a.key_ == b.key_; }
  friend auto operator<=>(const GeneSymbol& a, const GeneSymbol& b) { return a.key_ <=> b.key_; }

 private:
  std::string text_;
  std::string key_;
};

enum class Level : std::uint8_t { strong, moderate, weak, present, not_detected };

std::string_view to_string(Level level);
std::optional<Level> parse_level(std::string_view text);
inline bool is_positive(Level level) { return level != Level::not_detected; }
// Higher wins when one (gene, structure, stage) is annotated twice.
int precedence(Level level);

struct Annotation {
  GeneSymbol gene;
  StructureId structure;
  Stage stage;
  Level level;
  std::optional<std::string> source_ref;
};

struct Conflict {
  GeneSymbol gene;
  StructureId structure;
  Stage stage;
  Level kept;
  Level dropped;
  std::size_t line;  // line of the losing record
};

struct ConflictReport {
  std::vector<Conflict> conflicts;
  bool empty() const { return conflicts.empty(); }
};

// Immutable annotation index; at most one level per (gene, structure, stage).
class AnnotationStore {
 public:
  AnnotationStore() = default;

  // Builds the store, keeping the highest-precedence level for duplicates.
  // Every annotation must name a structure that exists at its stage.
  static AnnotationStore build(const Anatomy& anatomy, std::vector<Annotation> annotations,
                               ConflictReport* report = nullptr,
                               const std::vector<std::size_t>* lines = nullptr);

  std::size_t size() const { return records_.size(); }
  std::span<const Annotation> annotations() const { return records_; }

  // Distinct genes, sorted by case-insensitive key.
  std::span<const GeneSymbol> genes() const { return genes_; }
  std::size_t gene_count() const { return genes_.size(); }
  std::optional<std::uint32_t> gene_index(const GeneSymbol& gene) const;

  // Records for one gene at one stage, sorted by structure number.
  std::span<const Annotation> for_gene(const GeneSymbol& gene, Stage stage) const;
  std::span<const std::uint32_t> structure_indices(const GeneSymbol& gene, Stage stage) const;
  // Record indices at one stage and for one (structure, stage).
  std::span<const std::uint32_t> at_stage(Stage stage) const;
  std::span<const std::uint32_t> at_structure(StructureId structure, Stage stage) const;

  const Annotation* find(const GeneSymbol& gene, StructureId structure, Stage stage) const;
  // Anatomy index of the structure of record i.
  std::uint32_t structure_index(std::size_t record) const { return structure_index_[record]; }

 private:
  struct Range {
    std::uint32_t begin = 0;
    std::uint32_t end = 0;
  };
  static std::uint64_t gene_stage_key(std::uint32_t gene, Stage stage) {
    return (static_cast<std::uint64_t>(gene) << 5) | static_cast<std::uint64_t>(stage.value());
  }
  static std::uint64_t structure_stage_key(StructureId s, Stage stage) {
    return (static_cast<std::uint64_t>(s.number) << 5) | static_cast<std::uint64_t>(stage.value());
  }

  std::vector<Annotation> records_;  // sorted by (gene key, stage, structure)
  std::vector<std::uint32_t> structure_index_;
  std::vector<std::uint32_t> record_gene_;
  std::vector<GeneSymbol> genes_;
  std::unordered_map<std::string, std::uint32_t> gene_by_key_;
  std::unordered_map<std::uint64_t, Range> by_gene_stage_;
  std::vector<std::vector<std::uint32_t>> by_stage_;
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> by_structure_stage_;
};

struct AnnotationParseResult {
  AnnotationStore store;
  ConflictReport conflicts;
  std::vector<std::string> warnings;
};

// Newline-delimited JSON records; '#' lines and blank lines are skipped.
// Throws ParseError with the offending line number.
AnnotationParseResult parse_annotations(std::string_view text, const Anatomy& anatomy,
                                        const ParseOptions& options = {});

std::string write_annotation_line(const Annotation& annotation);

std::optional<Level> direct_level(const AnnotationStore& store, const GeneSymbol& gene,
                                  StructureId structure, Stage stage);

struct ExpressionState {
  enum class Kind : std::uint8_t { direct, propagated, no_info, not_present };
  Kind kind = Kind::no_info;
  Level level = Level::not_detected;  // meaningful only for direct

  static ExpressionState direct(Level l) { return {Kind::direct, l}; }
  static ExpressionState propagated() { return {Kind::propagated, Level::not_detected}; }
  static ExpressionState no_info() { return {Kind::no_info, Level::not_detected}; }
  static ExpressionState not_present() { return {Kind::not_present, Level::not_detected}; }

  bool is_positive() const {
    return kind == Kind::propagated || (kind == Kind::direct && atlasburst::is_positive(level));
  }
  friend bool operator==(const ExpressionState& a, const ExpressionState& b) {
    return a.kind == b.kind && (a.kind != Kind::direct || a.level == b.level);
  }
};

// The eight colour classes a node can fall into.
enum class StateClass : std::uint8_t {
  strong, moderate, weak, present, not_detected, propagated, no_info, not_present
};
inline constexpr std::size_t kStateClassCount = 8;

StateClass state_class(const ExpressionState& state);
std::string_view to_string(StateClass cls);
std::optional<StateClass> parse_state_class(std::string_view text);

// Expression state for every node of the staged or abstract view, in view order.
struct StateMap {
  GeneSymbol gene;
  Stage stage;
  AnatomyMode mode;
  std::vector<StructureId> ids;
  std::vector<ExpressionState> states;

  std::size_t size() const { return ids.size(); }
  std::optional<ExpressionState> find(StructureId id) const;
};

// Direct level wins; otherwise a strictly-descendant positive direct
// annotation makes a node propagated. not_detected never propagates. In
// abstract mode, structures absent at `stage` are not_present.
StateMap propagate_states(const AnnotationStore& store, const Anatomy& anatomy,
                          const GeneSymbol& gene, Stage stage, AnatomyMode mode);

// Same computation over an arbitrary view (e.g. a zoomed subtree).
std::vector<ExpressionState> propagate_over_view(const AnnotationStore& store, const Anatomy& anatomy,
                                                 const TreeView& view, const GeneSymbol& gene,
                                                 Stage stage, AnatomyMode mode);

// Upward-closed positive set in staged mode.
std::set<StructureId> expression_profile(const AnnotationStore& store, const Anatomy& anatomy,
                                         const GeneSymbol& gene, Stage stage);

struct SubsetResult {
  bool subset = true;
  std::optional<StructureId> witness;  // smallest id of g1's profile missing from g2's
};

SubsetResult profile_subset(const AnnotationStore& store, const Anatomy& anatomy,
                            const GeneSymbol& g1, const GeneSymbol& g2, Stage stage);

std::size_t annotation_count(const AnnotationStore& store, const GeneSymbol& gene, Stage stage);

}  // namespace atlasburst
