#include "atlasburst/fixtures.hpp"

#include <array>
#include <fstream>
#include <random>
#include <set>
#include <string_view>
#include <tuple>
#include <vector>

#include "atlasburst/anatomy.hpp"
#include "atlasburst/expression.hpp"

namespace atlasburst {

namespace {

// std distributions are implementation-defined; keep the mapping explicit so
// fixture bytes depend only on the seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : engine_() % n; }
  bool chance(std::uint64_t numerator, std::uint64_t denominator) { return below(denominator) < numerator; }

 private:
  std::mt19937_64 engine_;
};

struct System {
  std::string_view name;
  std::string_view abbr;
};

constexpr std::array<System, 8> kSystems = {{{"cardiovascular system", "CVS"},
                                             {"central nervous system", "CNS"},
                                             {"alimentary system", "AS"},
                                             {"respiratory system", "RS"},
                                             {"urogenital system", "UGS"},
                                             {"musculoskeletal system", "MSS"},
                                             {"sensory organ system", "SOS"},
                                             {"integumental system", "IS"}}};

constexpr std::array<std::string_view, 12> kStems = {"tissue", "mesenchyme", "epithelium", "vessel",
                                                     "nerve",  "cartilage",  "muscle",     "lumen",
                                                     "wall",   "cavity",     "gland",      "duct"};

constexpr std::array<std::string_view, 24> kFamilies = {
    "Bmp", "Wnt", "Fgf", "Sox", "Pax", "Hoxa", "Hoxd", "Shh", "Gli", "Tbx", "Msx", "Dlx",
    "Lhx", "Nkx", "Foxa", "Gata", "Six", "Eya", "Otx", "Emx", "Irx", "Hand", "Meis", "Pitx"};

constexpr std::uint32_t kRootNumber = 25765;
constexpr std::uint32_t kFirstNumber = 16000;

struct Node {
  Structure s;
  int first = 1;
  int last = 1;
};

}  // namespace

FixtureFiles generate_fixtures(const FixtureSpec& spec) {
  if (spec.structures < 5) throw InvalidArgument("bad_fixture", "need at least 5 structures");
  if (spec.genes < 1) throw InvalidArgument("bad_fixture", "need at least 1 gene");
  if (spec.stages < 1 || spec.stages > kMaxStage) throw InvalidArgument("bad_fixture", "stages must be in [1, 26]");
  if (spec.stages < 2 && spec.structures > 5)
    throw InvalidArgument("bad_fixture", "more than 5 structures need at least 2 stages");
  if (!(spec.density > 0)) throw InvalidArgument("bad_fixture", "density must be positive");

  Rng rng(spec.seed);
  const int last_stage = spec.stages;
  std::vector<Node> nodes;
  nodes.reserve(static_cast<std::size_t>(spec.structures));
  std::uint32_t next_number = kFirstNumber;

  auto add = [&](std::string name, std::optional<std::string> abbr, std::optional<std::size_t> parent, int first,
                 int last, bool major) {
    Node n;
    n.s.id = nodes.empty() ? StructureId::abstract(kRootNumber) : StructureId::abstract(next_number++);
    n.s.name = std::move(name);
    n.s.abbreviation = std::move(abbr);
    if (parent) n.s.parent = nodes[*parent].s.id;
    n.s.stages = StageSet::range(first, last);
    n.s.is_major_system = major;
    n.first = first;
    n.last = last;
    nodes.push_back(std::move(n));
  };

  // The five structures of the first stage.
  add("mouse", std::nullopt, std::nullopt, 1, last_stage, false);
  add("embryo", std::nullopt, 0, 1, last_stage, false);
  add("extraembryonic component", std::nullopt, 0, 1, last_stage, false);
  add("first polar body", std::nullopt, 0, 1, std::min(3, last_stage), false);
  add("zona pellucida", std::nullopt, 0, 1, std::min(4, last_stage), false);

  const std::size_t systems = std::min<std::size_t>(kSystems.size(), static_cast<std::size_t>(spec.structures - 5));
  for (std::size_t i = 0; i < systems; ++i) {
    int first = std::min(last_stage, 2 + static_cast<int>(rng.below(static_cast<std::uint64_t>(std::max(1, last_stage / 3)))));
    add(std::string(kSystems[i].name), std::string(kSystems[i].abbr), 1, first, last_stage, true);
  }

  // Candidate parents: anything alive after TS1 except the root.
  std::vector<std::size_t> parents;
  for (std::size_t i = 1; i < nodes.size(); ++i)
    if (nodes[i].last >= 2) parents.push_back(i);

  while (nodes.size() < static_cast<std::size_t>(spec.structures)) {
    std::size_t parent = rng.chance(9, 10) && parents.size() > 2
                             ? parents[2 + rng.below(parents.size() - 2)]
                             : parents[rng.below(std::min<std::size_t>(2, parents.size()))];
    const Node& p = nodes[parent];
    const int lo = std::max(p.first, 2);
    const auto width = static_cast<std::uint64_t>(p.last - lo + 1);
    // Min of two draws skews appearance early, so late stages are the densest.
    const int first = lo + static_cast<int>(std::min(rng.below(width), rng.below(width)));
    const int last = rng.chance(17, 20) ? p.last
                                        : first + static_cast<int>(rng.below(static_cast<std::uint64_t>(p.last - first + 1)));
    const auto k = nodes.size();
    add(std::string(kStems[rng.below(kStems.size())]) + " " + std::to_string(k), std::nullopt, parent, first, last,
        false);
    if (last >= 2) parents.push_back(k);
    if (k > 10 && rng.chance(3, 100)) nodes.back().s.isa.push_back(nodes[5 + rng.below(k - 5)].s.id);
  }

  std::uint32_t next_alias = 1;
  for (auto& n : nodes)
    for (int st = n.first; st <= n.last; ++st) n.s.aliases[st] = StructureId::staged(next_alias++);

  AnatomyDocument doc;
  doc.root = nodes.front().s.id;
  for (auto& n : nodes) doc.structures.push_back(n.s);

  FixtureFiles files;
  files.anatomy = write_anatomy_document(doc);

  // Per-stage candidate structures (root excluded), weighted by stage size.
  std::vector<std::vector<std::size_t>> alive(static_cast<std::size_t>(last_stage) + 1);
  for (std::size_t i = 1; i < nodes.size(); ++i)
    for (int st = nodes[i].first; st <= nodes[i].last; ++st) alive[static_cast<std::size_t>(st)].push_back(i);
  std::uint64_t total_weight = 0;
  for (int st = 1; st <= last_stage; ++st) total_weight += alive[static_cast<std::size_t>(st)].size();

  constexpr std::array<std::pair<Level, int>, 5> kLevelWeights = {
      {{Level::strong, 2}, {Level::moderate, 2}, {Level::weak, 2}, {Level::present, 3}, {Level::not_detected, 1}}};

  const auto extra = static_cast<std::uint64_t>(std::max(0.0, std::round(2.0 * (spec.density - 1.0))));
  std::set<std::tuple<int, std::size_t, int>> seen;
  std::uint64_t next_ref = 1000;
  std::string& out = files.annotations;
  out += "# atlasburst annotations, seed " + std::to_string(spec.seed) + "\n";
  for (int g = 0; g < spec.genes; ++g) {
    const auto family = kFamilies[static_cast<std::size_t>(g) % kFamilies.size()];
    const GeneSymbol gene(std::string(family) + std::to_string(g / static_cast<int>(kFamilies.size()) + 1));
    const std::uint64_t count = 1 + rng.below(extra + 1);
    bool wrote = false;
    for (std::uint64_t a = 0; a < count || !wrote; ++a) {
      std::uint64_t pick = rng.below(total_weight);
      int stage = 1;
      while (pick >= alive[static_cast<std::size_t>(stage)].size()) {
        pick -= alive[static_cast<std::size_t>(stage)].size();
        ++stage;
      }
      const std::size_t structure = alive[static_cast<std::size_t>(stage)][pick];
      int level_pick = static_cast<int>(rng.below(10));
      Level level = Level::strong;
      for (const auto& [l, w] : kLevelWeights) {
        if (level_pick < w) {
          level = l;
          break;
        }
        level_pick -= w;
      }
      if (!seen.emplace(g, structure, stage).second) continue;
      Annotation record{gene, nodes[structure].s.id, Stage(stage), level, "EMAGE:" + std::to_string(next_ref++)};
      out += write_annotation_line(record);
      out += '\n';
      wrote = true;
    }
  }
  return files;
}

void write_fixtures(const FixtureSpec& spec, const std::filesystem::path& dir) {
  FixtureFiles files = generate_fixtures(spec);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("io", "cannot create " + dir.string() + ": " + ec.message());
  auto write = [&](const char* name, const std::string& text) {
    std::ofstream f(dir / name, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("io", "cannot write " + (dir / name).string());
    f << text;
    if (!f) throw Error("io", "write failed for " + (dir / name).string());
  };
  write(kAnatomyFileName, files.anatomy);
  write(kAnnotationsFileName, files.annotations);
}

}  // namespace atlasburst
