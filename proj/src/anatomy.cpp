#include "atlasburst/anatomy.hpp"

#include <algorithm>
#include <charconv>
#include <set>

#include <nlohmann/json.hpp>

namespace atlasburst {

using nlohmann::json;

namespace {

// Line/column of a 1-based byte position reported by the JSON parser.
std::pair<std::size_t, std::size_t> locate(std::string_view text, std::size_t byte) {
  std::size_t end = std::min(byte == 0 ? 0 : byte - 1, text.size());
  std::size_t line = 1;
  std::size_t line_start = 0;
  for (std::size_t i = 0; i < end; ++i) {
    if (text[i] == '\n') {
      ++line;
      line_start = i + 1;
    }
  }
  return {line, end - line_start + 1};
}

[[noreturn]] void schema_error(const std::string& where, const std::string& what) {
  throw ParseError("schema", where + ": " + what, 0, 0);
}

StructureId parse_id(const json& value, IdNamespace expected, const std::string& where) {
  if (!value.is_string()) schema_error(where, "identifier must be a string");
  StructureId id;
  try {
    id = StructureId::parse(value.get_ref<const std::string&>());
  } catch (const InvalidArgument& e) {
    throw ParseError("bad_id", where + ": " + e.what(), 0, 0);
  }
  if (id.ns != expected)
    throw ParseError("bad_id",
                     where + ": expected " +
                         (expected == IdNamespace::abstract ? "EMAPA:" : "EMAP:") +
                         " identifier, got " + id.str(),
                     0, 0);
  return id;
}

int checked_stage(long long value, const std::string& where) {
  if (value < kMinStage || value > kMaxStage)
    throw ParseError("stage_out_of_range",
                     where + ": stage " + std::to_string(value) + " outside [1, 26]", 0, 0);
  return static_cast<int>(value);
}

long long parse_int_text(std::string_view text, const std::string& where) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size())
    schema_error(where, "bad stage token '" + std::string(text) + "'");
  return v;
}

StageSet parse_stages(const json& value, const std::string& where) {
  if (!value.is_array()) schema_error(where, "\"stages\" must be an array");
  StageSet set;
  for (const auto& item : value) {
    if (item.is_number_integer()) {
      set.insert(Stage(checked_stage(item.get<long long>(), where)));
    } else if (item.is_string()) {
      const auto& text = item.get_ref<const std::string&>();
      auto dash = text.find('-');
      if (dash == std::string::npos || dash == 0)
        schema_error(where, "stage interval must look like \"a-b\", got \"" + text + "\"");
      int first = checked_stage(parse_int_text(std::string_view(text).substr(0, dash), where), where);
      int last = checked_stage(parse_int_text(std::string_view(text).substr(dash + 1), where), where);
      if (first > last) schema_error(where, "empty stage interval \"" + text + "\"");
      for (int s = first; s <= last; ++s) set.insert(Stage(s));
    } else {
      schema_error(where, "stage entries must be integers or \"a-b\" strings");
    }
  }
  return set;
}

const std::set<std::string, std::less<>> kStructureKeys = {
    "id", "name", "abbr", "parent", "stages", "aliases", "major_system", "isa"};
const std::set<std::string, std::less<>> kTopKeys = {"format", "root", "structures"};

void check_keys(const json& object, const std::set<std::string, std::less<>>& known,
                const std::string& where, const ParseOptions& options,
                std::vector<std::string>& warnings) {
  for (const auto& [key, _] : object.items()) {
    if (known.contains(key)) continue;
    if (options.strict) schema_error(where, "unknown key \"" + key + "\"");
    warnings.push_back(where + ": ignored unknown key \"" + key + "\"");
  }
}

Structure parse_structure(const json& item, const std::string& where,
                          const ParseOptions& options, std::vector<std::string>& warnings) {
  if (!item.is_object()) schema_error(where, "structure must be an object");
  check_keys(item, kStructureKeys, where, options, warnings);

  Structure s;
  if (!item.contains("id")) schema_error(where, "missing \"id\"");
  s.id = parse_id(item["id"], IdNamespace::abstract, where);
  const std::string at = where + " (" + s.id.str() + ")";

  if (!item.contains("name") || !item["name"].is_string() ||
      item["name"].get_ref<const std::string&>().empty())
    schema_error(at, "\"name\" must be a non-empty string");
  s.name = item["name"].get<std::string>();

  if (auto it = item.find("abbr"); it != item.end() && !it->is_null()) {
    if (!it->is_string()) schema_error(at, "\"abbr\" must be a string");
    s.abbreviation = it->get<std::string>();
  }
  if (auto it = item.find("parent"); it != item.end() && !it->is_null())
    s.parent = parse_id(*it, IdNamespace::abstract, at);

  if (!item.contains("stages")) schema_error(at, "missing \"stages\"");
  s.stages = parse_stages(item["stages"], at);

  if (auto it = item.find("aliases"); it != item.end()) {
    if (!it->is_object()) schema_error(at, "\"aliases\" must be an object");
    for (const auto& [key, value] : it->items()) {
      int stage = checked_stage(parse_int_text(key, at), at);
      s.aliases[stage] = parse_id(value, IdNamespace::staged, at);
    }
  }
  if (auto it = item.find("major_system"); it != item.end()) {
    if (!it->is_boolean()) schema_error(at, "\"major_system\" must be a boolean");
    s.is_major_system = it->get<bool>();
  }
  if (auto it = item.find("isa"); it != item.end()) {
    if (!it->is_array()) schema_error(at, "\"isa\" must be an array");
    for (const auto& target : *it) s.isa.push_back(parse_id(target, IdNamespace::abstract, at));
  }
  return s;
}

json stages_json(const StageSet& stages) {
  json out = json::array();
  int s = kMinStage;
  while (s <= kMaxStage) {
    if (!stages.contains(Stage(s))) {
      ++s;
      continue;
    }
    int e = s;
    while (e + 1 <= kMaxStage && stages.contains(Stage(e + 1))) ++e;
    if (e == s)
      out.push_back(s);
    else
      out.push_back(std::to_string(s) + "-" + std::to_string(e));
    s = e + 1;
  }
  return out;
}

bool sibling_less(const Structure& a, const Structure& b) {
  int c = compare_ignore_case(a.name, b.name);
  if (c != 0) return c < 0;
  return a.id.number < b.id.number;
}

void add(ValidationReport& report, Severity severity, std::string rule,
         std::optional<StructureId> id, std::string detail) {
  report.findings.push_back({severity, std::move(rule), id, std::move(detail)});
}

}  // namespace

int compare_ignore_case(std::string_view a, std::string_view b) {
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    unsigned char ca = static_cast<unsigned char>(a[i]);
    unsigned char cb = static_cast<unsigned char>(b[i]);
    if (ca >= 'A' && ca <= 'Z') ca = static_cast<unsigned char>(ca - 'A' + 'a');
    if (cb >= 'A' && cb <= 'Z') cb = static_cast<unsigned char>(cb - 'A' + 'a');
    if (ca != cb) return ca < cb ? -1 : 1;
  }
  if (a.size() == b.size()) return 0;
  return a.size() < b.size() ? -1 : 1;
}

std::string to_lower_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out)
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  return out;
}

AnatomyDocument read_anatomy_document(std::string_view text, const ParseOptions& options) {
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    auto [line, column] = locate(text, e.byte);
    throw ParseError("syntax", e.what(), line, column);
  }

  AnatomyDocument doc;
  if (!root.is_object()) schema_error("document", "top level must be an object");
  check_keys(root, kTopKeys, "document", options, doc.warnings);
  if (!root.contains("format") || root["format"] != kAnatomyFormat)
    schema_error("document", "\"format\" must be \"" + std::string(kAnatomyFormat) + "\"");
  if (!root.contains("root")) schema_error("document", "missing \"root\"");
  doc.root = parse_id(root["root"], IdNamespace::abstract, "root");
  if (!root.contains("structures") || !root["structures"].is_array())
    schema_error("document", "\"structures\" must be an array");

  const auto& items = root["structures"];
  doc.structures.reserve(items.size());
  for (std::size_t i = 0; i < items.size(); ++i)
    doc.structures.push_back(
        parse_structure(items[i], "structures[" + std::to_string(i) + "]", options, doc.warnings));
  return doc;
}

std::string write_anatomy_document(const AnatomyDocument& doc) {
  json out = json::object();
  out["format"] = kAnatomyFormat;
  out["root"] = doc.root.str();
  json list = json::array();
  for (const auto& s : doc.structures) {
    json item;
    item["id"] = s.id.str();
    item["name"] = s.name;
    if (s.abbreviation) item["abbr"] = *s.abbreviation;
    if (s.parent) item["parent"] = s.parent->str();
    item["stages"] = stages_json(s.stages);
    json aliases = json::object();
    for (const auto& [stage, id] : s.aliases) aliases[std::to_string(stage)] = id.str();
    item["aliases"] = std::move(aliases);
    if (s.is_major_system) item["major_system"] = true;
    if (!s.isa.empty()) {
      json isa = json::array();
      for (const auto& id : s.isa) isa.push_back(id.str());
      item["isa"] = std::move(isa);
    }
    list.push_back(std::move(item));
  }
  out["structures"] = std::move(list);
  // One structure per line keeps large fixture files diffable.
  std::string text = "{\"format\":" + out["format"].dump() + ",\"root\":" + out["root"].dump() +
                     ",\"structures\":[\n";
  for (std::size_t i = 0; i < out["structures"].size(); ++i) {
    text += out["structures"][i].dump();
    text += i + 1 < out["structures"].size() ? ",\n" : "\n";
  }
  text += "]}\n";
  return text;
}

std::size_t ValidationReport::error_count() const {
  return static_cast<std::size_t>(std::count_if(
      findings.begin(), findings.end(), [](const Finding& f) { return f.severity == Severity::error; }));
}

bool ValidationReport::has_rule(std::string_view rule) const {
  return std::any_of(findings.begin(), findings.end(),
                     [&](const Finding& f) { return f.rule == rule; });
}

std::string_view to_string(Severity severity) {
  return severity == Severity::error ? "error" : "warning";
}

namespace {

std::string describe_first_error(const ValidationReport& report) {
  for (const auto& f : report.findings) {
    if (f.severity != Severity::error) continue;
    std::string text = f.rule;
    if (f.structure) text += " " + f.structure->str();
    text += ": " + f.detail;
    if (report.error_count() > 1)
      text += " (and " + std::to_string(report.error_count() - 1) + " more)";
    return text;
  }
  return "invalid anatomy";
}

std::string first_error_rule(const ValidationReport& report) {
  for (const auto& f : report.findings)
    if (f.severity == Severity::error) return f.rule;
  return "INVALID";
}

}  // namespace

AnatomyError::AnatomyError(ValidationReport report)
    : Error(first_error_rule(report), describe_first_error(report)),
      report_(std::move(report)) {}

ValidationReport validate_anatomy(const AnatomyDocument& doc) {
  ValidationReport report;
  const auto& items = doc.structures;

  std::unordered_map<std::uint32_t, std::size_t> index;
  for (std::size_t i = 0; i < items.size(); ++i) {
    auto [it, inserted] = index.emplace(items[i].id.number, i);
    if (!inserted)
      add(report, Severity::error, "DUPLICATE_ID", items[i].id, "structure declared more than once");
  }
  auto lookup = [&](StructureId id) -> std::optional<std::size_t> {
    auto it = index.find(id.number);
    if (it == index.end()) return std::nullopt;
    return it->second;
  };

  if (!lookup(doc.root))
    add(report, Severity::error, "MISSING_ROOT", doc.root, "root is not declared");

  // Parent resolution; -1 means "no usable parent".
  std::vector<long> parent(items.size(), -1);
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto& s = items[i];
    if (index.at(s.id.number) != i) continue;  // duplicate, already reported
    if (s.id == doc.root) {
      if (s.parent) add(report, Severity::error, "ROOT_HAS_PARENT", s.id, "root must not have a parent");
      continue;
    }
    if (!s.parent) {
      add(report, Severity::error, "NO_PARENT", s.id, "only the root may omit \"parent\"");
      continue;
    }
    auto p = lookup(*s.parent);
    if (!p) {
      add(report, Severity::error, "MISSING_PARENT", s.id,
          "parent " + s.parent->str() + " is not declared");
      continue;
    }
    parent[i] = static_cast<long>(*p);
  }

  // Cycle detection over parent links: 0 = unvisited, 1 = on current walk, 2 = done.
  std::vector<std::uint8_t> mark(items.size(), 0);
  for (std::size_t start = 0; start < items.size(); ++start) {
    if (mark[start] != 0) continue;
    std::vector<std::size_t> walk;
    long cur = static_cast<long>(start);
    while (cur >= 0 && mark[static_cast<std::size_t>(cur)] == 0) {
      mark[static_cast<std::size_t>(cur)] = 1;
      walk.push_back(static_cast<std::size_t>(cur));
      cur = parent[static_cast<std::size_t>(cur)];
    }
    if (cur >= 0 && mark[static_cast<std::size_t>(cur)] == 1) {
      auto first = std::find(walk.begin(), walk.end(), static_cast<std::size_t>(cur));
      StructureId smallest = items[*first].id;
      std::string chain;
      for (auto it = first; it != walk.end(); ++it) {
        smallest = std::min(smallest, items[*it].id);
        chain += items[*it].id.str() + " -> ";
      }
      chain += items[*first].id.str();
      add(report, Severity::error, "CYCLE", smallest, "parent chain loops: " + chain);
    }
    for (auto i : walk) mark[i] = 2;
  }

  std::unordered_map<std::uint32_t, std::size_t> alias_owner;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto& s = items[i];
    if (index.at(s.id.number) != i) continue;
    if (s.stages.empty())
      add(report, Severity::error, "EMPTY_STAGES", s.id, "structure exists at no stage");
    for (const auto& [stage, staged] : s.aliases) {
      if (!s.stages.contains(Stage(stage)))
        add(report, Severity::error, "ALIAS_STAGE_MISMATCH", s.id,
            staged.str() + " is keyed to TS" + std::to_string(stage) +
                ", where the structure does not exist");
      auto [it, inserted] = alias_owner.emplace(staged.number, i);
      if (!inserted && it->second != i)
        add(report, Severity::error, "ALIAS_CONFLICT", s.id,
            staged.str() + " is already an alias of " + items[it->second].id.str());
    }
    if (parent[i] >= 0) {
      const auto& p = items[static_cast<std::size_t>(parent[i])];
      if (!s.stages.is_subset_of(p.stages)) {
        std::string missing;
        s.stages.for_each([&](Stage st) {
          if (!p.stages.contains(st)) missing += (missing.empty() ? "TS" : ",TS") + std::to_string(st.value());
        });
        add(report, Severity::error, "ORPHAN_AT_STAGE", s.id,
            "exists at " + missing + " where parent " + p.id.str() + " does not");
      }
    }
    for (const auto& target : s.isa)
      if (!lookup(target))
        add(report, Severity::warning, "ISA_UNKNOWN", s.id, "is_a target " + target.str() + " is not declared");
  }

  // Sibling name uniqueness (case-insensitive, matching the sort order).
  std::map<std::pair<std::size_t, std::string>, std::size_t> sibling_names;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (parent[i] < 0 || index.at(items[i].id.number) != i) continue;
    auto key = std::make_pair(static_cast<std::size_t>(parent[i]), to_lower_ascii(items[i].name));
    auto [it, inserted] = sibling_names.emplace(key, i);
    if (!inserted)
      add(report, Severity::error, "DUP_SIBLING_NAME", items[i].id,
          "name \"" + items[i].name + "\" repeats sibling " + items[it->second].id.str());
  }

  std::stable_sort(report.findings.begin(), report.findings.end(), [](const Finding& a, const Finding& b) {
    auto ka = a.structure ? a.structure->number : 0;
    auto kb = b.structure ? b.structure->number : 0;
    if (ka != kb) return ka < kb;
    return a.rule < b.rule;
  });
  return report;
}

ValidationReport validate_anatomy(const Anatomy& anatomy) {
  return validate_anatomy(anatomy.to_document());
}

TreeView::TreeView(std::optional<Stage> stage, std::vector<ViewNode> nodes,
                   std::size_t structure_count)
    : stage_(stage), nodes_(std::move(nodes)), by_structure_(structure_count, -1) {
  by_number_.reserve(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    nodes_[i].subtree_end = static_cast<std::uint32_t>(i + 1);
    by_structure_.at(nodes_[i].structure) = static_cast<std::int32_t>(i);
    by_number_.emplace(nodes_[i].id.number, static_cast<std::uint32_t>(i));
    max_depth_ = std::max(max_depth_, nodes_[i].depth);
  }
  // Children follow parents in preorder, so a reverse sweep settles subtree ends.
  for (std::size_t i = nodes_.size(); i-- > 0;) {
    int p = nodes_[i].parent;
    if (p >= 0)
      nodes_[static_cast<std::size_t>(p)].subtree_end =
          std::max(nodes_[static_cast<std::size_t>(p)].subtree_end, nodes_[i].subtree_end);
  }
}

std::optional<std::size_t> TreeView::find(StructureId id) const {
  if (!id.is_abstract()) return std::nullopt;
  auto it = by_number_.find(id.number);
  if (it == by_number_.end()) return std::nullopt;
  return it->second;
}

std::size_t TreeView::index_of(StructureId id) const {
  auto i = find(id);
  if (!i) throw NotFound("unknown_structure", id.str() + " is not in this view");
  return *i;
}

std::optional<std::size_t> TreeView::position_of_structure(std::uint32_t structure) const {
  if (structure >= by_structure_.size() || by_structure_[structure] < 0) return std::nullopt;
  return static_cast<std::size_t>(by_structure_[structure]);
}

std::vector<std::size_t> TreeView::children(std::size_t i) const {
  std::vector<std::size_t> out;
  for_each_child(i, [&](std::size_t j) { out.push_back(j); });
  return out;
}

std::vector<StructureId> TreeView::ids() const {
  std::vector<StructureId> out;
  out.reserve(nodes_.size());
  for (const auto& n : nodes_) out.push_back(n.id);
  return out;
}

Anatomy Anatomy::from_document(AnatomyDocument doc) {
  ValidationReport report = validate_anatomy(doc);
  if (report.error_count() > 0) throw AnatomyError(std::move(report));

  std::unordered_map<std::uint32_t, std::size_t> file_index;
  for (std::size_t i = 0; i < doc.structures.size(); ++i)
    file_index.emplace(doc.structures[i].id.number, i);

  std::vector<std::vector<std::size_t>> kids(doc.structures.size());
  std::size_t root = file_index.at(doc.root.number);
  for (std::size_t i = 0; i < doc.structures.size(); ++i)
    if (doc.structures[i].parent) kids[file_index.at(doc.structures[i].parent->number)].push_back(i);
  for (auto& list : kids)
    std::sort(list.begin(), list.end(), [&](std::size_t a, std::size_t b) {
      return sibling_less(doc.structures[a], doc.structures[b]);
    });

  Anatomy anatomy;
  anatomy.warnings_ = std::move(doc.warnings);
  for (const auto& f : report.findings)
    anatomy.warnings_.push_back(std::string(f.rule) + " " + (f.structure ? f.structure->str() : "") +
                                ": " + f.detail);

  std::vector<ViewNode> abstract_nodes;
  abstract_nodes.reserve(doc.structures.size());
  anatomy.structures_.reserve(doc.structures.size());
  // Iterative preorder; (file index, depth, parent view index).
  struct Frame {
    std::size_t file;
    int depth;
    int parent;
  };
  std::vector<Frame> stack{{root, 0, -1}};
  while (!stack.empty()) {
    Frame f = stack.back();
    stack.pop_back();
    auto pos = static_cast<std::uint32_t>(anatomy.structures_.size());
    anatomy.structures_.push_back(std::move(doc.structures[f.file]));
    abstract_nodes.push_back({anatomy.structures_.back().id, pos, f.depth, f.parent, 0});
    const auto& list = kids[f.file];
    for (auto it = list.rbegin(); it != list.rend(); ++it)
      stack.push_back({*it, f.depth + 1, static_cast<int>(pos)});
  }

  const std::size_t n = anatomy.structures_.size();
  for (std::uint32_t i = 0; i < n; ++i) {
    const auto& s = anatomy.structures_[i];
    anatomy.by_number_.emplace(s.id.number, i);
    for (const auto& [stage, staged] : s.aliases) anatomy.alias_owner_.emplace(staged.number, i);
  }

  anatomy.staged_views_.reserve(kStageCount);
  for (int st = kMinStage; st <= kMaxStage; ++st) {
    Stage stage(st);
    std::vector<ViewNode> nodes;
    std::vector<int> remap(n, -1);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& a = abstract_nodes[i];
      if (!anatomy.structures_[i].stages.contains(stage)) continue;
      int parent = -1;
      if (a.parent >= 0) {
        parent = remap[static_cast<std::size_t>(a.parent)];
        if (parent < 0) continue;  // ancestor chain broken at this stage
      }
      remap[i] = static_cast<int>(nodes.size());
      nodes.push_back({a.id, a.structure, a.depth, parent, 0});
    }
    anatomy.staged_views_.emplace_back(stage, std::move(nodes), n);
  }
  anatomy.abstract_view_ = TreeView(std::nullopt, std::move(abstract_nodes), n);
  return anatomy;
}

const Structure& Anatomy::structure(StructureId id) const {
  auto i = find(id);
  if (!i) throw NotFound("unknown_structure", id.str() + " is not in the anatomy");
  return structures_[*i];
}

std::optional<std::uint32_t> Anatomy::find(StructureId id) const {
  if (!id.is_abstract()) return std::nullopt;
  auto it = by_number_.find(id.number);
  if (it == by_number_.end()) return std::nullopt;
  return it->second;
}

StructureId Anatomy::resolve_alias(StructureId staged) const {
  if (staged.is_abstract()) throw InvalidArgument("bad_id", staged.str() + " is not a staged (EMAP:) id");
  auto it = alias_owner_.find(staged.number);
  if (it == alias_owner_.end()) throw NotFound("unknown_alias", staged.str() + " is not a registered alias");
  return structures_[it->second].id;
}

AnatomyDocument Anatomy::to_document() const {
  AnatomyDocument doc;
  doc.root = root();
  doc.structures = structures_;
  return doc;
}

Anatomy parse_anatomy(std::string_view text, const ParseOptions& options) {
  return Anatomy::from_document(read_anatomy_document(text, options));
}

std::size_t descendant_count(const TreeView& view, StructureId node) {
  return view.descendant_count(view.index_of(node));
}

}  // namespace atlasburst
