// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "atlasburst/cloud.hpp"
#include "atlasburst/compose.hpp"
#include "atlasburst/fixtures.hpp"
#include "atlasburst/layout.hpp"
#include "atlasburst/service.hpp"
#include "atlasburst/svg.hpp"
#include "support/data.hpp"
#include "support/oracles.hpp"
#include "support/random_tree.hpp"

using namespace atlasburst;
namespace ts = testing_support;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = true;
  std::string detail;

  void fail(const std::string& why) {
    if (pass) detail = why;
    pass = false;
  }
};

struct Fixture {
  Anatomy anatomy;
  AnnotationStore store;
};

Fixture load_fixture(const FixtureSpec& spec) {
  auto files = generate_fixtures(spec);
  auto anatomy = parse_anatomy(files.anatomy);
  auto store = parse_annotations(files.annotations, anatomy).store;
  return {std::move(anatomy), std::move(store)};
}

struct Interval {
  double lo = 0, hi = 0;
};

std::map<StructureId, Interval> intervals_of(const Geometry& g) {
  std::map<StructureId, Interval> out;
  if (g.kind == LayoutKind::sunburst)
    for (const auto& a : g.arcs) out[a.id] = {a.start_angle, a.end_angle};
  else
    for (const auto& r : g.rects) out[r.id] = {r.x0, r.x1};
  return out;
}

// Children are found from the raw parent pointers, not from the view.
bool check_partition(const Anatomy& anatomy, const Geometry& g, std::string& why) {
  const double full = g.kind == LayoutKind::sunburst ? kTwoPi : 1.0;
  auto iv = intervals_of(g);
  std::map<StructureId, std::vector<Interval>> children;
  std::optional<StructureId> root;
  for (const auto& [id, interval] : iv) {
    const auto& parent = anatomy.structure(id).parent;
    if (parent && iv.count(*parent))
      children[*parent].push_back(interval);
    else if (root) {
      why = "two roots in one layout";
      return false;
    } else
      root = id;
  }
  if (!root) {
    why = "no root";
    return false;
  }
  if (std::fabs(iv[*root].hi - iv[*root].lo - full) > 1e-9) {
    why = "root extent is not full";
    return false;
  }
  for (auto& [parent, kids] : children) {
    std::sort(kids.begin(), kids.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
    const Interval& p = iv[parent];
    double cursor = p.lo;
    double sum = 0;
    for (const auto& k : kids) {
      if (std::fabs(k.lo - cursor) > 1e-9) {
        why = "gap or overlap under " + parent.str();
        return false;
      }
      cursor = k.hi;
      sum += k.hi - k.lo;
    }
    if (std::fabs(cursor - p.hi) > 1e-9 || std::fabs(sum - (p.hi - p.lo)) > 1e-9) {
      why = "children do not cover " + parent.str();
      return false;
    }
  }
  return true;
}

Geometry layout(const TreeView& view, LayoutKind kind) {
  LayoutParams params;
  params.kind = kind;
  return compute_layout(view, params);
}

template <class F>
double median_ms(int runs, F&& f) {
  std::vector<double> times;
  for (int i = 0; i < runs; ++i) {
    auto start = Clock::now();
    f();
    times.push_back(seconds_since(start) * 1000.0);
  }
  std::sort(times.begin(), times.end());
  return times[times.size() / 2];
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", v);
  return buf;
}

Outcome partition_correctness() {
  Outcome o;
  auto start = Clock::now();
  int layouts = 0;
  for (int t = 0; t < 100 && o.pass; ++t) {
    int size = t == 0 ? 5 : t == 1 ? 2000 : ts::Rng(1000 + static_cast<std::uint64_t>(t)).between(5, 2000);
    auto fx = load_fixture({size, 1, 26, 1.0, static_cast<std::uint64_t>(t) + 1});
    std::vector<const TreeView*> views{&fx.anatomy.abstract_view()};
    for (int s = kMinStage; s <= kMaxStage; ++s) views.push_back(&fx.anatomy.staged_view(Stage(s)));
    for (const TreeView* v : views) {
      if (v->empty()) continue;
      for (auto kind : {LayoutKind::sunburst, LayoutKind::icicle}) {
        std::string why;
        if (!check_partition(fx.anatomy, layout(*v, kind), why)) {
          o.fail("tree " + std::to_string(t) + ": " + why);
          break;
        }
        ++layouts;
      }
    }
  }
  double secs = seconds_since(start);
  if (secs >= 30) o.fail("took " + fmt(secs) + " s");
  if (o.pass) o.detail = std::to_string(layouts) + " layouts in " + fmt(secs) + " s";
  return o;
}

Outcome stage_stability() {
  Outcome o;
  auto fx = load_fixture({2000, 40, 26, 20.0, 42});
  const GeneSymbol gene = fx.store.genes()[0];
  std::string reference;
  for (int s = kMinStage; s <= kMaxStage; ++s) {
    auto m = compose_diagram(fx.anatomy, fx.store, gene, Stage(s), AnatomyMode::abstract, LayoutKind::sunburst,
                             Palette::defaults());
    auto doc = geometry_document(m.geometry, AnatomyMode::abstract, Stage(s));
    if (s == kMinStage) reference = doc;
    if (doc != reference) o.fail("abstract geometry changed at TS" + std::to_string(s));
  }
  int differing = 0;
  for (int s = kMinStage; s <= kMaxStage; ++s)
    for (int t = s + 1; t <= kMaxStage; ++t) {
      const auto& vs = fx.anatomy.staged_view(Stage(s));
      const auto& vt = fx.anatomy.staged_view(Stage(t));
      if (vs.ids() == vt.ids()) continue;
      ++differing;
      auto ds = geometry_document(layout(vs, LayoutKind::sunburst), AnatomyMode::staged, Stage(s));
      auto dt = geometry_document(layout(vt, LayoutKind::sunburst), AnatomyMode::staged, Stage(t));
      if (ds == dt) o.fail("staged TS" + std::to_string(s) + " and TS" + std::to_string(t) + " identical");
    }
  if (differing == 0) o.fail("no stage pairs with different node sets");
  if (o.pass) o.detail = "26 identical abstract documents, " + std::to_string(differing) + " staged pairs differ";
  return o;
}

Outcome propagation_oracle() {
  Outcome o;
  auto start = Clock::now();
  ts::Rng rng(3);
  const std::vector<std::string> genes{"Bmp4", "Shh", "Wnt1"};
  int negative_cases = 0;
  for (int trial = 0; trial < 1000 && o.pass; ++trial) {
    auto anatomy = ts::random_anatomy(rng, {rng.between(1, 50), true, 2});
    auto store = AnnotationStore::build(anatomy, ts::random_annotations(rng, anatomy, genes, rng.between(0, 60)));
    GeneSymbol gene(rng.pick(genes));
    Stage stage(rng.between(kMinStage, kMaxStage));
    for (auto mode : {AnatomyMode::staged, AnatomyMode::abstract}) {
      auto got = propagate_states(store, anatomy, gene, stage, mode);
      auto expected = ts::oracle_states(anatomy, store, gene, stage, mode);
      if (got.size() != expected.size()) {
        o.fail("trial " + std::to_string(trial) + ": node count differs");
        break;
      }
      for (std::size_t i = 0; i < got.size(); ++i) {
        auto it = expected.find(got.ids[i]);
        if (it == expected.end() || !(it->second == got.states[i])) {
          o.fail("trial " + std::to_string(trial) + ": state differs at " + got.ids[i].str());
          break;
        }
        const auto& st = got.states[i];
        if (mode == AnatomyMode::staged && st.kind == ExpressionState::Kind::direct && st.level == Level::not_detected)
          ++negative_cases;
      }
    }
  }
  double secs = seconds_since(start);
  if (secs >= 10) o.fail("took " + fmt(secs) + " s");
  if (negative_cases == 0) o.fail("no not_detected cases were exercised");
  if (o.pass)
    o.detail = "1000 trials, " + std::to_string(negative_cases) + " not_detected nodes, " + fmt(secs) + " s";
  return o;
}

Outcome containment() {
  Outcome o;
  const auto& m = ts::mini();
  const Stage stage(17);
  const std::vector<std::string> genes{"gA", "gB", "gC", "gD"};
  // gA: digit; gB: digit, paw pad; gC: lens; gD: digit, paw pad, lens.
  const bool known[4][4] = {{true, true, false, true},
                            {false, true, false, true},
                            {false, false, true, true},
                            {false, false, false, true}};
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) {
      bool got = profile_subset(m.store, m.anatomy, GeneSymbol(genes[i]), GeneSymbol(genes[j]), stage).subset;
      if (got != known[i][j]) o.fail(genes[i] + " vs " + genes[j] + " wrong");
    }
  auto positive = [](StateClass c) { return c != StateClass::no_info && c != StateClass::not_present; };
  for (auto mode : {AnatomyMode::staged, AnatomyMode::abstract})
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = 0; j < 4; ++j) {
        if (!known[i][j]) continue;
        auto a = compose_diagram(m.anatomy, m.store, GeneSymbol(genes[i]), stage, mode, LayoutKind::sunburst,
                                 Palette::defaults());
        auto b = compose_diagram(m.anatomy, m.store, GeneSymbol(genes[j]), stage, mode, LayoutKind::sunburst,
                                 Palette::defaults());
        for (std::size_t k = 0; k < a.nodes.size(); ++k)
          if (positive(a.nodes[k].state) && !positive(b.nodes[k].state))
            o.fail("visual subset broken for " + genes[i] + " in " + genes[j]);
      }
  if (o.pass) o.detail = "4x4 matrix and visual nesting hold";
  return o;
}

Outcome scale_budget() {
  Outcome o;
  auto fx = load_fixture({2000, 200, 26, 20.0, 42});
  // The most populated stage gives the largest staged diagram.
  Stage busiest(kMinStage);
  for (int s = kMinStage; s <= kMaxStage; ++s)
    if (fx.anatomy.staged_view(Stage(s)).size() > fx.anatomy.staged_view(busiest).size()) busiest = Stage(s);
  const GeneSymbol gene = fx.store.genes()[0];
  std::optional<RenderModel> model;
  double compose_ms = median_ms(21, [&] {
    model = compose_diagram(fx.anatomy, fx.store, gene, busiest, AnatomyMode::abstract, LayoutKind::sunburst,
                            Palette::defaults());
  });
  std::string svg;
  double svg_ms = median_ms(21, [&] { svg = render_svg(*model, 800); });

  auto cloud_fx = load_fixture({2000, 19000, 26, 3.0, 7});
  Stage cloud_stage(kMinStage);
  for (int s = kMinStage; s <= kMaxStage; ++s)
    if (cloud_fx.store.at_stage(Stage(s)).size() > cloud_fx.store.at_stage(cloud_stage).size()) cloud_stage = Stage(s);
  std::size_t cloud_nodes = 0;
  double cloud_ms = median_ms(21, [&] {
    cloud_nodes = build_cloud(cloud_fx.store, cloud_fx.anatomy, cloud_stage).nodes.size();
  });
  // Whole-atlas cloud: one node for each of the 19000 genes.
  std::size_t all_nodes = 0;
  double all_ms = median_ms(11, [&] {
    std::vector<CloudNode> nodes;
    nodes.reserve(cloud_fx.store.gene_count());
    for (const auto& g : cloud_fx.store.genes()) {
      std::size_t count = 0;
      for (int s = kMinStage; s <= kMaxStage; ++s) count += annotation_count(cloud_fx.store, g, Stage(s));
      nodes.push_back({g, count, 0, 0, 0, false});
    }
    cloud_layout(nodes);
    all_nodes = nodes.size();
  });

  if (model->nodes.size() != 2000) o.fail("model has " + std::to_string(model->nodes.size()) + " nodes");
  if (all_nodes != 19000) o.fail("cloud has " + std::to_string(all_nodes) + " genes");
  if (compose_ms >= 50) o.fail("layout+compose " + fmt(compose_ms) + " ms");
  if (cloud_ms >= 200 || all_ms >= 200) o.fail("cloud " + fmt(std::max(cloud_ms, all_ms)) + " ms");
  if (svg_ms >= 150) o.fail("render.svg " + fmt(svg_ms) + " ms");
  std::string numbers = "layout+compose " + fmt(compose_ms) + " ms, cloud TS" + std::to_string(cloud_stage.value()) +
                        " (" + std::to_string(cloud_nodes) + " genes) " + fmt(cloud_ms) + " ms, 19000-gene cloud " +
                        fmt(all_ms) + " ms, svg " + fmt(svg_ms) + " ms";
  if (o.pass)
    o.detail = numbers;
  else
    o.detail += "; " + numbers;
  return o;
}

Outcome zoom_correctness() {
  Outcome o;
  ts::Rng rng(6);
  int zooms = 0;
  for (int t = 0; t < 10 && o.pass; ++t) {
    auto fx = load_fixture({2000, 1, 26, 1.0, 100 + static_cast<std::uint64_t>(t)});
    for (const TreeView* v : {&fx.anatomy.abstract_view(), &fx.anatomy.staged_view(Stage(20))}) {
      for (auto kind : {LayoutKind::sunburst, LayoutKind::icicle}) {
        const Geometry before = layout(*v, kind);
        auto iv_before = intervals_of(before);
        // Identity at the root and every child of the root.
        auto identity = [&](StructureId clicked) {
          auto z = reroot(*v, clicked);
          return z.ids() == v->ids() &&
                 geometry_document(layout(z, kind), AnatomyMode::abstract, std::nullopt) ==
                     geometry_document(before, AnatomyMode::abstract, std::nullopt);
        };
        if (!identity((*v)[0].id)) o.fail("reroot at root is not the identity");
        for (std::size_t c : v->children(0))
          if (!identity((*v)[c].id)) o.fail("reroot at child of root is not the identity");
        for (int k = 0; k < 10; ++k) {
          std::size_t clicked = rng.below(v->size());
          if ((*v)[clicked].depth < 2) continue;
          auto z = reroot(*v, (*v)[clicked].id);
          const StructureId new_root = z[0].id;
          if (!(new_root == (*v)[static_cast<std::size_t>((*v)[clicked].parent)].id)) o.fail("wrong zoom root");
          if (z.size() != v->descendant_count(*v->find(new_root)) + 1) o.fail("zoomed subtree has the wrong size");
          const Geometry after = layout(z, kind);
          std::string why;
          if (!check_partition(fx.anatomy, after, why)) o.fail("zoomed layout: " + why);
          const double full = kind == LayoutKind::sunburst ? kTwoPi : 1.0;
          const Interval r = iv_before[new_root];
          for (const auto& [id, iv] : intervals_of(after)) {
            const Interval& old = iv_before[id];
            double ratio_after = (iv.hi - iv.lo) / full;
            double ratio_before = (old.hi - old.lo) / (r.hi - r.lo);
            if (std::fabs(ratio_after - ratio_before) > 1e-9) o.fail("extent ratio changed for " + id.str());
          }
          ++zooms;
        }
      }
    }
  }
  if (zooms == 0) o.fail("no zooms exercised");
  if (o.pass) o.detail = std::to_string(zooms) + " zooms on 2000-node trees";
  return o;
}

Outcome determinism() {
  Outcome o;
  const FixtureSpec spec{2000, 100, 26, 3.0, 42};
  auto base = fs::temp_directory_path() / "atlasburst-acceptance";
  fs::remove_all(base);
  write_fixtures(spec, base / "a");
  write_fixtures(spec, base / "b");
  for (const char* f : {kAnatomyFileName, kAnnotationsFileName})
    if (ts::read_file((base / "a" / f).string()) != ts::read_file((base / "b" / f).string()))
      o.fail(std::string("fixture file differs: ") + f);

  ServiceConfig config;
  config.data_dir = base / "a";
  AtlasService service(config);
  auto snap = service.snapshot();
  const std::string g0 = snap->store.genes()[0].text();
  const std::string g1 = snap->store.genes()[1].text();
  const std::string s0 = std::to_string(snap->anatomy.structures()[5].id.number);
  std::vector<Request> requests{
      {"GET", "/api/v1/meta", {}},
      {"GET", "/api/v1/anatomy", {{"stage", "20"}}},
      {"GET", "/api/v1/anatomy", {{"mode", "abstract"}}},
      {"GET", "/api/v1/layout", {{"stage", "20"}, {"kind", "icicle"}}},
      {"GET", "/api/v1/layout", {{"mode", "abstract"}, {"root", "EMAPA:" + s0}}},
      {"GET", "/api/v1/expression", {{"gene", g0}, {"stage", "20"}}},
      {"GET", "/api/v1/subset", {{"g1", g0}, {"g2", g1}, {"stage", "20"}}},
      {"GET", "/api/v1/compose", {{"genes", g0 + "," + g1}, {"stages", "18,20"}, {"mode", "abstract"}}},
      {"GET", "/api/v1/render.svg", {{"genes", g0 + "," + g1}, {"stages", "20"}}},
      {"GET", "/api/v1/cloud", {{"stage", "20"}}},
      {"GET", "/api/v1/anatomy", {{"stage", "27"}}},
  };
  for (const auto& req : requests) {
    auto first = service.handle(req);
    for (int i = 0; i < 3; ++i) {
      auto again = service.handle(req);
      if (again.body != first.body || again.status != first.status || again.version != first.version)
        o.fail("response differs for " + req.path);
    }
    if (handle_request(req, *snap).body != first.body) o.fail("cached and uncached responses differ for " + req.path);
  }
  auto model = compose_diagram(snap->anatomy, snap->store, GeneSymbol(g0), Stage(20), AnatomyMode::staged,
                               LayoutKind::sunburst, snap->palette);
  auto model2 = compose_diagram(snap->anatomy, snap->store, GeneSymbol(g0), Stage(20), AnatomyMode::staged,
                                LayoutKind::sunburst, snap->palette);
  if (render_svg(model, 600) != render_svg(model2, 600)) o.fail("SVG differs");
  fs::remove_all(base);
  if (o.pass) o.detail = "fixtures, " + std::to_string(requests.size()) + " API requests and SVG stable";
  return o;
}

Outcome data_facts() {
  Outcome o;
  for (std::uint64_t seed : {1u, 42u, 99u}) {
    auto fx = load_fixture({2000, 10, 26, 2.0, seed});
    auto n = fx.anatomy.staged_view(Stage(1)).size();
    if (n != 5) o.fail("seed " + std::to_string(seed) + ": TS1 has " + std::to_string(n) + " structures");
  }
  const auto& a = ts::mini().anatomy;
  auto h12 = a.resolve_alias(StructureId::parse("EMAP:315"));
  auto h17 = a.resolve_alias(StructureId::parse("EMAP:2411"));
  if (!(h12 == h17)) o.fail("heart aliases resolve to different ids");
  if (a.structure(h12).name != "heart") o.fail("heart aliases resolve to " + a.structure(h12).name);
  if (o.pass) o.detail = "TS1 has 5 structures; EMAP:315 and EMAP:2411 -> " + h12.str();
  return o;
}

Outcome cloud_filter() {
  Outcome o;
  const auto& m = ts::mini();
  auto eye = build_cloud(m.store, m.anatomy, Stage(18), StructureId::parse("EMAPA:16198"));
  std::vector<std::string> names;
  for (const auto& n : eye.nodes) names.push_back(n.gene.text());
  if (names != std::vector<std::string>{"Crx", "Pax6", "Sox2"}) o.fail("eye cloud is not {Crx, Pax6, Sox2}");
  if (build_cloud(m.store, m.anatomy, Stage(18)).nodes.size() <= 3) o.fail("unfiltered cloud is not larger");

  auto fx = load_fixture({2000, 400, 26, 10.0, 9});
  ts::Rng rng(9);
  int pairs = 0;
  while (pairs < 100 && o.pass) {
    Stage stage(rng.between(2, kMaxStage));
    const auto& v = fx.anatomy.staged_view(stage);
    if (v.size() < 2) continue;
    std::size_t outer = rng.below(v.size());
    if (v.descendant_count(outer) == 0) continue;
    std::size_t inner = outer + 1 + rng.below(v.descendant_count(outer));
    auto wide = build_cloud(fx.store, fx.anatomy, stage, v[outer].id);
    auto narrow = build_cloud(fx.store, fx.anatomy, stage, v[inner].id);
    auto expected = ts::oracle_cloud_counts(fx.anatomy, fx.store, stage, v[inner].id);
    std::map<std::string, std::size_t> wide_counts;
    for (const auto& n : wide.nodes) wide_counts[n.gene.key()] = n.count;
    if (narrow.nodes.size() != expected.size()) o.fail("filtered cloud disagrees with the oracle");
    for (const auto& n : narrow.nodes) {
      auto it = wide_counts.find(n.gene.key());
      if (it == wide_counts.end() || n.count > it->second) o.fail("filter monotonicity broken at " + v[inner].id.str());
      if (expected[n.gene.key()] != n.count) o.fail("filtered count disagrees with the oracle");
    }
    ++pairs;
  }
  if (o.pass) o.detail = "eye cloud has 3 genes; 100 nested filter pairs monotone";
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"partition correctness", partition_correctness},
      {"stage stability", stage_stability},
      {"propagation oracle", propagation_oracle},
      {"containment analysis", containment},
      {"scale budget", scale_budget},
      {"zoom correctness", zoom_correctness},
      {"determinism", determinism},
      {"data facts", data_facts},
      {"cloud filter", cloud_filter},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.fail(std::string("exception: ") + e.what());
    }
    failures += !o.pass;
    std::printf("%s %zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
