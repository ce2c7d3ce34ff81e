#include "atlasburst/cli.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <CLI11.hpp>

#include "atlasburst/cloud.hpp"
#include "atlasburst/compose.hpp"
#include "atlasburst/fixtures.hpp"
#include "atlasburst/service.hpp"
#include "atlasburst/svg.hpp"

namespace atlasburst::cli {
namespace {

// Failure after arguments parsed fine; reported on stderr, exit 1.
struct Failed {
  std::string message;
};

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failed{"cannot read " + path.string()};
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_output(const std::string& target, const std::string& content, std::ostream& out) {
  if (target == "-") {
    out << content;
    return;
  }
  std::ofstream file(target, std::ios::binary);
  if (!file || !(file << content)) throw Failed{"cannot write " + target};
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ','))
    if (!item.empty()) out.push_back(item);
  if (out.empty()) throw InvalidArgument("bad_list", "empty list '" + text + "'");
  return out;
}

std::shared_ptr<const Snapshot> load(const std::string& data, bool lenient) {
  ServiceConfig config;
  config.data_dir = data;
  config.strict = !lenient;
  check_config(config);
  try {
    return load_snapshot(config, 1);
  } catch (const LoadError& e) {
    std::string message = std::string(e.what());
    for (const auto& line : e.report()) message += "\n  " + line;
    throw Failed{message};
  }
}

struct DataOptions {
  std::string data;
  bool lenient = false;

  void attach(CLI::App& cmd) {
    cmd.add_option("--data", data, "Directory with anatomy.json and annotations.jsonl")
        ->envname("ATLASBURST_DATA")
        ->required();
    cmd.add_flag("--lenient", lenient, "Warn about unknown keys instead of rejecting them");
  }
};

int cmd_validate(const DataOptions& opts, std::ostream& out) {
  const std::filesystem::path dir = opts.data;
  ParseOptions options;
  options.strict = !opts.lenient;
  std::vector<std::string> findings;
  bool fatal = false;

  std::optional<Anatomy> anatomy;
  try {
    AnatomyDocument doc = read_anatomy_document(read_text(dir / kAnatomyFileName), options);
    for (const auto& w : doc.warnings) findings.push_back(std::string(kAnatomyFileName) + ": warning " + w);
    ValidationReport report = validate_anatomy(doc);
    for (const auto& f : report.findings)
      findings.push_back(std::string(kAnatomyFileName) + ": " + std::string(to_string(f.severity)) + " " + f.rule +
                         (f.structure ? " " + f.structure->str() : "") + ": " + f.detail);
    if (report.error_count() == 0) anatomy.emplace(Anatomy::from_document(std::move(doc)));
  } catch (const ParseError& e) {
    findings.push_back(std::string(kAnatomyFileName) + ": error " + e.code() + ": " + e.what());
  }

  if (anatomy) {
    try {
      auto parsed = parse_annotations(read_text(dir / kAnnotationsFileName), *anatomy, options);
      for (const auto& w : parsed.warnings) findings.push_back(std::string(kAnnotationsFileName) + ": warning " + w);
      for (const auto& c : parsed.conflicts.conflicts)
        findings.push_back(std::string(kAnnotationsFileName) + ": warning CONFLICT line " + std::to_string(c.line) +
                           ": " + c.gene.text() + " " + c.structure.str() + " TS" + std::to_string(c.stage.value()) +
                           " kept " + std::string(to_string(c.kept)) + ", dropped " +
                           std::string(to_string(c.dropped)));
    } catch (const ParseError& e) {
      findings.push_back(std::string(kAnnotationsFileName) + ": error " + e.code() + ": " + e.what());
    }
  } else {
    fatal = true;
  }

  if (std::filesystem::exists(dir / kPaletteFileName)) {
    try {
      Palette::from_json(read_text(dir / kPaletteFileName));
    } catch (const ParseError& e) {
      findings.push_back(std::string(kPaletteFileName) + ": error " + e.code() + ": " + e.what());
    }
  }

  for (const auto& f : findings) out << f << '\n';
  if (fatal) out << "annotations not checked: anatomy is invalid\n";
  out << findings.size() << (findings.size() == 1 ? " finding\n" : " findings\n");
  return findings.empty() ? kExitOk : kExitFindings;
}

struct RenderOptions {
  std::string genes;
  std::string stages;
  std::string kind = "sunburst";
  std::string mode = "staged";
  std::string format = "svg";
  std::string root;
  int size = 400;
  int columns = 0;
  std::string output = "-";
};

int cmd_render(const DataOptions& data, const RenderOptions& opts, std::ostream& out) {
  auto snap = load(data.data, data.lenient);
  std::vector<GeneSymbol> genes;
  for (const auto& g : split_list(opts.genes)) genes.emplace_back(g);
  std::vector<Stage> stages;
  for (const auto& s : split_list(opts.stages)) stages.push_back(Stage::parse(s));
  const AnatomyMode mode = parse_anatomy_mode(opts.mode);
  const LayoutKind kind = parse_layout_kind(opts.kind);

  std::string document;
  if (genes.size() == 1 && stages.size() == 1) {
    LayoutParams params;
    params.kind = kind;
    std::optional<StructureId> root;
    if (!opts.root.empty()) {
      StructureId id = StructureId::parse(opts.root);
      root = id.is_abstract() ? id : snap->anatomy.resolve_alias(id);
    }
    RenderModel model = compose_diagram(snap->anatomy, snap->store, genes[0], stages[0], mode, params, snap->palette, root);
    document = opts.format == "svg" ? render_svg(model, opts.size) : render_model_document(model) + "\n";
  } else {
    if (!opts.root.empty()) throw InvalidArgument("bad_root", "--root applies to a single diagram only");
    GridSpec spec;
    spec.mode = mode;
    spec.kind = kind;
    for (const auto& g : genes)
      for (Stage s : stages) spec.cells.emplace_back(g, s);
    spec.columns = opts.columns > 0 ? opts.columns : static_cast<int>(stages.size());
    Grid grid = compose_grid(snap->anatomy, snap->store, spec, snap->palette);
    document = opts.format == "svg" ? render_grid_svg(grid, opts.size) : grid_document(grid) + "\n";
  }
  write_output(opts.output, document, out);
  return kExitOk;
}

// Display width in terminal columns; every code point counts as one.
std::size_t display_width(const std::string& s) {
  return static_cast<std::size_t>(std::count_if(s.begin(), s.end(), [](char c) { return (c & 0xC0) != 0x80; }));
}

std::string pad(const std::string& s, std::size_t width) {
  return s + std::string(width - std::min(width, display_width(s)), ' ');
}

int cmd_compare(const DataOptions& data, const std::string& gene_list, int stage_value, std::ostream& out) {
  auto snap = load(data.data, data.lenient);
  std::vector<GeneSymbol> genes;
  for (const auto& g : split_list(gene_list)) genes.emplace_back(g);
  Stage stage(stage_value);

  std::vector<std::set<StructureId>> profiles;
  for (const auto& g : genes) profiles.push_back(expression_profile(snap->store, snap->anatomy, g, stage));
  auto subset = [&](std::size_t a, std::size_t b) {
    return std::includes(profiles[b].begin(), profiles[b].end(), profiles[a].begin(), profiles[a].end());
  };

  std::size_t width = display_width("TS" + std::to_string(stage.value()));
  for (const auto& g : genes) width = std::max(width, display_width(g.text()));
  width += 2;

  out << pad("TS" + std::to_string(stage.value()), width);
  for (const auto& g : genes) out << pad(g.text(), width);
  out << '\n';
  for (std::size_t i = 0; i < genes.size(); ++i) {
    out << pad(genes[i].text(), width);
    for (std::size_t j = 0; j < genes.size(); ++j) {
      bool le = subset(i, j);
      bool ge = subset(j, i);
      const char* cell = le && ge ? "=" : le ? "⊆" : ge ? "⊇" : "·";
      out << pad(cell, width);
    }
    out << '\n';
  }
  return kExitOk;
}

struct CloudOptions {
  int stage = 0;
  std::string structure;
  std::string prefix;
  std::string select;
  std::string output = "-";
};

int cmd_cloud(const DataOptions& data, const CloudOptions& opts, std::ostream& out) {
  auto snap = load(data.data, data.lenient);
  std::optional<StructureId> filter;
  if (!opts.structure.empty()) {
    StructureId id = StructureId::parse(opts.structure);
    filter = id.is_abstract() ? id : snap->anatomy.resolve_alias(id);
  }
  CloudModel cloud = build_cloud(snap->store, snap->anatomy, Stage(opts.stage), filter);
  if (!opts.select.empty()) {
    Selection selection;
    for (const auto& g : split_list(opts.select)) selection = toggle_selection(selection, cloud, GeneSymbol(g));
    apply_selection(cloud, selection);
  }
  if (!opts.prefix.empty()) {
    std::string key = to_lower_ascii(opts.prefix);
    std::erase_if(cloud.nodes, [&](const CloudNode& n) { return n.gene.key().rfind(key, 0) != 0; });
  }
  write_output(opts.output, cloud_document(cloud) + "\n", out);
  return kExitOk;
}

struct ServeOptions {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string palette;
  std::size_t cache_size = 256;
};

int cmd_serve(const DataOptions& data, const ServeOptions& opts, std::ostream& out) {
  ServiceConfig config;
  config.data_dir = data.data;
  config.strict = !data.lenient;
  config.host = opts.host;
  config.port = opts.port;
  config.cache_size = opts.cache_size;
  if (!opts.palette.empty()) config.palette_path = opts.palette;
  check_config(config);
  std::unique_ptr<AtlasService> service;
  try {
    service = std::make_unique<AtlasService>(config);
  } catch (const LoadError& e) {
    std::string message = e.what();
    for (const auto& line : e.report()) message += "\n  " + line;
    throw Failed{message};
  }
  HttpServer server(*service);
  if (server.bind(config.host, config.port) < 0)
    throw Failed{"cannot listen on " + config.host + ":" + std::to_string(config.port)};
  out << "serving " << config.data_dir.string() << " (snapshot " << service->snapshot()->version << ") on http://"
      << config.host << ':' << config.port << std::endl;
  server.run();
  return kExitOk;
}

int cmd_fixtures(const FixtureSpec& spec, const std::string& dir, std::ostream& out) {
  write_fixtures(spec, dir);
  out << "wrote " << spec.structures << " structures, " << spec.genes << " genes to " << dir << '\n';
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sunburst and icicle views of gene expression over a staged anatomy", "atlasburst"};
  app.require_subcommand(1);

  DataOptions validate_data, render_data, compare_data, cloud_data, serve_data;

  auto* validate = app.add_subcommand("validate", "Check anatomy, annotations and palette");
  validate_data.attach(*validate);

  RenderOptions render_opts;
  auto* render = app.add_subcommand("render", "Render one diagram, or a grid for several genes/stages");
  render_data.attach(*render);
  render->add_option("--gene,--genes", render_opts.genes, "Gene symbol(s), comma separated")->required();
  render->add_option("--stage,--stages", render_opts.stages, "Theiler stage(s), comma separated")->required();
  render->add_option("--kind", render_opts.kind)->check(CLI::IsMember({"sunburst", "icicle"}));
  render->add_option("--mode", render_opts.mode)->check(CLI::IsMember({"staged", "abstract"}));
  render->add_option("--format", render_opts.format)->check(CLI::IsMember({"svg", "json"}));
  render->add_option("--root", render_opts.root, "Zoom: draw the subtree rooted at this structure");
  render->add_option("--size", render_opts.size, "Diagram size in pixels")->check(CLI::Range(1, 8192));
  render->add_option("--columns", render_opts.columns, "Grid columns (default: one per stage)")
      ->check(CLI::Range(1, 1024));
  render->add_option("-o,--output", render_opts.output, "Output file, '-' for standard output");

  std::string compare_genes;
  int compare_stage = 0;
  auto* compare = app.add_subcommand("compare", "Print the pairwise profile containment matrix");
  compare_data.attach(*compare);
  compare->add_option("--genes", compare_genes)->required();
  compare->add_option("--stage", compare_stage)->required()->check(CLI::Range(kMinStage, kMaxStage));

  CloudOptions cloud_opts;
  auto* cloud = app.add_subcommand("cloud", "Write the gene cloud for one stage");
  cloud_data.attach(*cloud);
  cloud->add_option("--stage", cloud_opts.stage)->required()->check(CLI::Range(kMinStage, kMaxStage));
  cloud->add_option("--structure", cloud_opts.structure, "Count only annotations within this subtree");
  cloud->add_option("--prefix", cloud_opts.prefix, "Keep genes starting with this text");
  cloud->add_option("--select", cloud_opts.select, "Mark these genes as selected");
  cloud->add_option("-o,--output", cloud_opts.output, "Output file, '-' for standard output");

  ServeOptions serve_opts;
  auto* serve = app.add_subcommand("serve", "Start the HTTP service");
  serve_data.attach(*serve);
  serve->add_option("--host", serve_opts.host);
  serve->add_option("--port", serve_opts.port)->check(CLI::Range(1, 65535));
  serve->add_option("--palette", serve_opts.palette, "Palette JSON (default: <data>/palette.json if present)");
  serve->add_option("--cache-size", serve_opts.cache_size, "Cached state maps, 0 to disable");

  FixtureSpec spec;
  std::string fixture_dir;
  auto* fixtures = app.add_subcommand("fixtures", "Generate a deterministic synthetic data directory");
  fixtures->add_option("--out", fixture_dir)->required();
  fixtures->add_option("--structures", spec.structures)->check(CLI::PositiveNumber);
  fixtures->add_option("--genes", spec.genes)->check(CLI::PositiveNumber);
  fixtures->add_option("--stages", spec.stages)->check(CLI::Range(1, kMaxStage));
  fixtures->add_option("--density", spec.density)->check(CLI::PositiveNumber);
  fixtures->add_option("--seed", spec.seed);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    const CLI::App* failing = &app;
    for (auto* sub : app.get_subcommands()) failing = sub;
    err << failing->help();
    return kExitUsage;
  }

  try {
    if (validate->parsed()) return cmd_validate(validate_data, out);
    if (render->parsed()) return cmd_render(render_data, render_opts, out);
    if (compare->parsed()) return cmd_compare(compare_data, compare_genes, compare_stage, out);
    if (cloud->parsed()) return cmd_cloud(cloud_data, cloud_opts, out);
    if (serve->parsed()) return cmd_serve(serve_data, serve_opts, out);
    if (fixtures->parsed()) return cmd_fixtures(spec, fixture_dir, out);
  } catch (const Failed& f) {
    err << "error: " << f.message << '\n';
    return kExitFindings;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.code() << ": " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.code() << ": " << e.what() << '\n';
    return kExitFindings;
  }
  return kExitUsage;
}

}  // namespace atlasburst::cli
