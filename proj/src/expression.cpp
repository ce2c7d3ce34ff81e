#include "atlasburst/expression.hpp"

#include <algorithm>
#include <array>
#include <numeric>

#include <nlohmann/json.hpp>

namespace atlasburst {

using nlohmann::json;

GeneSymbol::GeneSymbol(std::string_view text) : text_(text), key_(to_lower_ascii(text)) {
  if (text.empty()) throw InvalidArgument("bad_gene", "gene symbol is empty");
  if (text.size() > 64) throw InvalidArgument("bad_gene", "gene symbol longer than 64 characters");
  for (char c : text)
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f')
      throw InvalidArgument("bad_gene", "gene symbol contains whitespace: '" + std::string(text) + "'");
}

namespace {

constexpr std::array<std::string_view, 5> kLevelNames = {"strong", "moderate", "weak", "present",
                                                         "not_detected"};
constexpr std::array<std::string_view, kStateClassCount> kClassNames = {
    "strong", "moderate", "weak", "present", "not_detected", "propagated", "no_info", "not_present"};

}  // namespace

std::string_view to_string(Level level) { return kLevelNames[static_cast<std::size_t>(level)]; }

std::optional<Level> parse_level(std::string_view text) {
  for (std::size_t i = 0; i < kLevelNames.size(); ++i)
    if (kLevelNames[i] == text) return static_cast<Level>(i);
  return std::nullopt;
}

int precedence(Level level) {
  switch (level) {
    case Level::strong: return 4;
    case Level::moderate: return 3;
    case Level::weak: return 2;
    case Level::present: return 1;
    case Level::not_detected: return 0;
  }
  return 0;
}

StateClass state_class(const ExpressionState& state) {
  switch (state.kind) {
    case ExpressionState::Kind::direct: return static_cast<StateClass>(state.level);
    case ExpressionState::Kind::propagated: return StateClass::propagated;
    case ExpressionState::Kind::no_info: return StateClass::no_info;
    case ExpressionState::Kind::not_present: return StateClass::not_present;
  }
  return StateClass::no_info;
}

std::string_view to_string(StateClass cls) { return kClassNames[static_cast<std::size_t>(cls)]; }

std::optional<StateClass> parse_state_class(std::string_view text) {
  for (std::size_t i = 0; i < kClassNames.size(); ++i)
    if (kClassNames[i] == text) return static_cast<StateClass>(i);
  return std::nullopt;
}

AnnotationStore AnnotationStore::build(const Anatomy& anatomy, std::vector<Annotation> annotations,
                                       ConflictReport* report, const std::vector<std::size_t>* lines) {
  auto line_of = [&](std::size_t i) -> std::size_t { return lines ? (*lines)[i] : 0; };

  std::vector<std::uint32_t> structure_of(annotations.size());
  for (std::size_t i = 0; i < annotations.size(); ++i) {
    const auto& a = annotations[i];
    auto idx = anatomy.find(a.structure);
    if (!idx)
      throw ParseError("unknown_structure", a.structure.str() + " is not in the anatomy", line_of(i), 0);
    if (!anatomy.exists_at(*idx, a.stage))
      throw ParseError("absent_at_stage",
                       a.structure.str() + " does not exist at TS" + std::to_string(a.stage.value()),
                       line_of(i), 0);
    structure_of[i] = *idx;
  }

  std::vector<std::size_t> order(annotations.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    const auto& a = annotations[x];
    const auto& b = annotations[y];
    if (a.gene.key() != b.gene.key()) return a.gene.key() < b.gene.key();
    if (a.stage != b.stage) return a.stage < b.stage;
    return a.structure.number < b.structure.number;
  });

  AnnotationStore store;
  // First spelling seen in input order becomes the displayed symbol.
  std::unordered_map<std::string, GeneSymbol> display;
  for (const auto& a : annotations) display.emplace(a.gene.key(), a.gene);

  std::size_t g = 0;
  while (g < order.size()) {
    std::size_t h = g + 1;
    const auto& head = annotations[order[g]];
    while (h < order.size() && annotations[order[h]].gene == head.gene &&
           annotations[order[h]].stage == head.stage &&
           annotations[order[h]].structure == head.structure)
      ++h;
    std::size_t best = g;
    for (std::size_t k = g + 1; k < h; ++k)
      if (precedence(annotations[order[k]].level) > precedence(annotations[order[best]].level)) best = k;
    if (report) {
      for (std::size_t k = g; k < h; ++k) {
        if (k == best) continue;
        const auto& lost = annotations[order[k]];
        report->conflicts.push_back({lost.gene, lost.structure, lost.stage,
                                     annotations[order[best]].level, lost.level, line_of(order[k])});
      }
    }
    std::size_t keep = order[best];
    Annotation record = std::move(annotations[keep]);
    if (store.genes_.empty() || store.genes_.back() != record.gene) {
      store.genes_.push_back(display.at(record.gene.key()));
      store.gene_by_key_.emplace(record.gene.key(), static_cast<std::uint32_t>(store.genes_.size() - 1));
    }
    record.gene = store.genes_.back();
    store.records_.push_back(std::move(record));
    store.structure_index_.push_back(structure_of[keep]);
    store.record_gene_.push_back(static_cast<std::uint32_t>(store.genes_.size() - 1));
    g = h;
  }
  store.by_stage_.assign(kStageCount + 1, {});
  for (std::uint32_t i = 0; i < store.records_.size(); ++i) {
    const auto& r = store.records_[i];
    auto key = gene_stage_key(store.record_gene_[i], r.stage);
    auto [it, inserted] = store.by_gene_stage_.emplace(key, Range{i, i + 1});
    if (!inserted) it->second.end = i + 1;
    store.by_stage_[static_cast<std::size_t>(r.stage.value())].push_back(i);
    store.by_structure_stage_[structure_stage_key(r.structure, r.stage)].push_back(i);
  }
  return store;
}

std::optional<std::uint32_t> AnnotationStore::gene_index(const GeneSymbol& gene) const {
  auto it = gene_by_key_.find(gene.key());
  if (it == gene_by_key_.end()) return std::nullopt;
  return it->second;
}

std::span<const Annotation> AnnotationStore::for_gene(const GeneSymbol& gene, Stage stage) const {
  auto g = gene_index(gene);
  if (!g) return {};
  auto it = by_gene_stage_.find(gene_stage_key(*g, stage));
  if (it == by_gene_stage_.end()) return {};
  return std::span<const Annotation>(records_).subspan(it->second.begin, it->second.end - it->second.begin);
}

std::span<const std::uint32_t> AnnotationStore::structure_indices(const GeneSymbol& gene, Stage stage) const {
  auto g = gene_index(gene);
  if (!g) return {};
  auto it = by_gene_stage_.find(gene_stage_key(*g, stage));
  if (it == by_gene_stage_.end()) return {};
  return std::span<const std::uint32_t>(structure_index_)
      .subspan(it->second.begin, it->second.end - it->second.begin);
}

std::span<const std::uint32_t> AnnotationStore::at_stage(Stage stage) const {
  if (by_stage_.empty()) return {};
  return by_stage_[static_cast<std::size_t>(stage.value())];
}

std::span<const std::uint32_t> AnnotationStore::at_structure(StructureId structure, Stage stage) const {
  auto it = by_structure_stage_.find(structure_stage_key(structure, stage));
  if (it == by_structure_stage_.end()) return {};
  return it->second;
}

const Annotation* AnnotationStore::find(const GeneSymbol& gene, StructureId structure, Stage stage) const {
  auto range = for_gene(gene, stage);
  auto it = std::lower_bound(range.begin(), range.end(), structure.number,
                             [](const Annotation& a, std::uint32_t n) { return a.structure.number < n; });
  if (it == range.end() || it->structure != structure) return nullptr;
  return &*it;
}

namespace {

const std::array<std::string_view, 5> kAnnotationKeys = {"gene", "structure", "stage", "level", "ref"};

}  // namespace

AnnotationParseResult parse_annotations(std::string_view text, const Anatomy& anatomy,
                                        const ParseOptions& options) {
  AnnotationParseResult result;
  std::vector<Annotation> annotations;
  std::vector<std::size_t> lines;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    auto first = line.find_first_not_of(" \t");
    if (first == std::string_view::npos || line[first] == '#') continue;

    json record;
    try {
      record = json::parse(line.begin(), line.end());
    } catch (const json::parse_error& e) {
      throw ParseError("syntax", e.what(), line_no, e.byte);
    }
    auto fail = [&](const std::string& code, const std::string& what) -> void {
      throw ParseError(code, what, line_no, 0);
    };
    if (!record.is_object()) fail("schema", "record must be a JSON object");
    for (const auto& [key, _] : record.items()) {
      if (std::find(kAnnotationKeys.begin(), kAnnotationKeys.end(), key) != kAnnotationKeys.end()) continue;
      if (options.strict) fail("schema", "unknown key \"" + key + "\"");
      result.warnings.push_back("line " + std::to_string(line_no) + ": ignored unknown key \"" + key + "\"");
    }
    auto string_field = [&](const char* key) -> const std::string& {
      auto it = record.find(key);
      if (it == record.end() || !it->is_string()) fail("schema", std::string("\"") + key + "\" must be a string");
      return it->get_ref<const std::string&>();
    };

    std::optional<GeneSymbol> gene;
    try {
      gene.emplace(string_field("gene"));
    } catch (const InvalidArgument& e) {
      fail("bad_gene", e.what());
    }
    StructureId structure;
    try {
      structure = StructureId::parse(string_field("structure"));
    } catch (const InvalidArgument& e) {
      fail("bad_id", e.what());
    }
    if (!structure.is_abstract()) fail("bad_id", "annotations must use EMAPA: ids, got " + structure.str());
    auto stage_it = record.find("stage");
    if (stage_it == record.end() || !stage_it->is_number_integer()) fail("schema", "\"stage\" must be an integer");
    auto stage_value = stage_it->get<long long>();
    if (stage_value < kMinStage || stage_value > kMaxStage)
      fail("stage_out_of_range", "stage " + std::to_string(stage_value) + " outside [1, 26]");
    auto level = parse_level(string_field("level"));
    if (!level) fail("bad_level", "unknown level \"" + string_field("level") + "\"");
    std::optional<std::string> ref;
    if (auto it = record.find("ref"); it != record.end() && !it->is_null()) ref = string_field("ref");

    annotations.push_back({std::move(*gene), structure, Stage(static_cast<int>(stage_value)), *level, std::move(ref)});
    lines.push_back(line_no);
  }

  result.store = AnnotationStore::build(anatomy, std::move(annotations), &result.conflicts, &lines);
  return result;
}

std::string write_annotation_line(const Annotation& a) {
  // Fixed key order so generated files are byte-stable.
  std::string out = "{\"gene\":" + json(a.gene.text()).dump() + ",\"structure\":\"" + a.structure.str() +
                    "\",\"stage\":" + std::to_string(a.stage.value()) + ",\"level\":\"" +
                    std::string(to_string(a.level)) + "\"";
  if (a.source_ref) out += ",\"ref\":" + json(*a.source_ref).dump();
  out += "}";
  return out;
}

std::optional<Level> direct_level(const AnnotationStore& store, const GeneSymbol& gene, StructureId structure,
                                  Stage stage) {
  const Annotation* a = store.find(gene, structure, stage);
  if (!a) return std::nullopt;
  return a->level;
}

std::optional<ExpressionState> StateMap::find(StructureId id) const {
  for (std::size_t i = 0; i < ids.size(); ++i)
    if (ids[i] == id) return states[i];
  return std::nullopt;
}

std::vector<ExpressionState> propagate_over_view(const AnnotationStore& store, const Anatomy& anatomy,
                                                 const TreeView& view, const GeneSymbol& gene, Stage stage,
                                                 AnatomyMode mode) {
  const std::size_t n = view.size();
  std::vector<ExpressionState> states(n, ExpressionState::no_info());
  std::vector<std::uint8_t> positive_below(n, 0);

  auto records = store.for_gene(gene, stage);
  auto structures = store.structure_indices(gene, stage);
  for (std::size_t r = 0; r < records.size(); ++r) {
    auto pos = view.position_of_structure(structures[r]);
    if (!pos) continue;
    states[*pos] = ExpressionState::direct(records[r].level);
  }
  // Reverse preorder visits every child before its parent.
  for (std::size_t i = n; i-- > 1;) {
    int p = view[i].parent;
    if (p < 0) continue;
    bool positive = positive_below[i] ||
                    (states[i].kind == ExpressionState::Kind::direct && is_positive(states[i].level));
    if (positive) positive_below[static_cast<std::size_t>(p)] = 1;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (mode == AnatomyMode::abstract && !anatomy.exists_at(view[i].structure, stage)) {
      states[i] = ExpressionState::not_present();
      continue;
    }
    if (states[i].kind != ExpressionState::Kind::direct && positive_below[i])
      states[i] = ExpressionState::propagated();
  }
  return states;
}

StateMap propagate_states(const AnnotationStore& store, const Anatomy& anatomy, const GeneSymbol& gene,
                          Stage stage, AnatomyMode mode) {
  const TreeView& view = mode == AnatomyMode::staged ? anatomy.staged_view(stage) : anatomy.abstract_view();
  return StateMap{gene, stage, mode, view.ids(), propagate_over_view(store, anatomy, view, gene, stage, mode)};
}

std::set<StructureId> expression_profile(const AnnotationStore& store, const Anatomy& anatomy,
                                         const GeneSymbol& gene, Stage stage) {
  // Ancestor closure of the positive direct annotations. A node annotated
  // not_detected still joins when something below it is positive.
  std::set<StructureId> out;
  const TreeView& view = anatomy.staged_view(stage);
  std::vector<char> in(view.size(), 0);
  auto records = store.for_gene(gene, stage);
  auto indices = store.structure_indices(gene, stage);
  for (std::size_t r = 0; r < records.size(); ++r) {
    if (!is_positive(records[r].level)) continue;
    auto pos = view.position_of_structure(indices[r]);
    for (int i = pos ? static_cast<int>(*pos) : -1; i >= 0 && !in[static_cast<std::size_t>(i)];
         i = view[static_cast<std::size_t>(i)].parent)
      in[static_cast<std::size_t>(i)] = 1;
  }
  for (std::size_t i = 0; i < view.size(); ++i)
    if (in[i]) out.insert(view[i].id);
  return out;
}

SubsetResult profile_subset(const AnnotationStore& store, const Anatomy& anatomy, const GeneSymbol& g1,
                            const GeneSymbol& g2, Stage stage) {
  auto p1 = expression_profile(store, anatomy, g1, stage);
  auto p2 = expression_profile(store, anatomy, g2, stage);
  for (const auto& id : p1)
    if (!p2.contains(id)) return {false, id};
  return {true, std::nullopt};
}

std::size_t annotation_count(const AnnotationStore& store, const GeneSymbol& gene, Stage stage) {
  return store.for_gene(gene, stage).size();
}

}  // namespace atlasburst
