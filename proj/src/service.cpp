#include "atlasburst/service.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <httplib.h>
#include <openssl/evp.h>

#include "atlasburst/cloud.hpp"
#include "atlasburst/fixtures.hpp"
#include "atlasburst/json_writer.hpp"
#include "atlasburst/layout.hpp"
#include "atlasburst/svg.hpp"

namespace atlasburst {

void check_config(const ServiceConfig& config) {
  if (config.port < 1 || config.port > 65535)
    throw InvalidArgument("bad_port", "port must be in [1, 65535], got " + std::to_string(config.port));
  std::error_code ec;
  if (!std::filesystem::is_directory(config.data_dir, ec))
    throw InvalidArgument("bad_data_dir", config.data_dir.string() + " is not a directory");
}

namespace {

std::optional<std::string> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string sha256_hex(const std::vector<const std::string*>& parts) {
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  for (const std::string* p : parts) {
    const std::uint64_t len = p->size();
    EVP_DigestUpdate(ctx, &len, sizeof len);
    EVP_DigestUpdate(ctx, p->data(), p->size());
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int size = 0;
  EVP_DigestFinal_ex(ctx, digest, &size);
  EVP_MD_CTX_free(ctx);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < size; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

}  // namespace

std::shared_ptr<const Snapshot> load_snapshot(const ServiceConfig& config, std::uint64_t version) {
  const auto anatomy_path = config.data_dir / kAnatomyFileName;
  const auto annotations_path = config.data_dir / kAnnotationsFileName;
  auto anatomy_text = read_file(anatomy_path);
  if (!anatomy_text) throw LoadError("io", "cannot read " + anatomy_path.string(), {anatomy_path.string() + ": missing"});
  auto annotations_text = read_file(annotations_path);
  if (!annotations_text)
    throw LoadError("io", "cannot read " + annotations_path.string(), {annotations_path.string() + ": missing"});

  std::optional<std::string> palette_text;
  std::filesystem::path palette_path;
  if (config.palette_path) {
    palette_path = *config.palette_path;
    palette_text = read_file(palette_path);
    if (!palette_text) throw LoadError("io", "cannot read " + palette_path.string(), {palette_path.string() + ": missing"});
  } else {
    palette_path = config.data_dir / kPaletteFileName;
    palette_text = read_file(palette_path);
  }

  ParseOptions options;
  options.strict = config.strict;

  std::optional<Anatomy> anatomy;
  try {
    anatomy.emplace(parse_anatomy(*anatomy_text, options));
  } catch (const AnatomyError& e) {
    std::vector<std::string> report;
    for (const auto& f : e.report().findings)
      report.push_back(std::string(kAnatomyFileName) + ": " + std::string(to_string(f.severity)) + " " + f.rule +
                       (f.structure ? " " + f.structure->str() : "") + ": " + f.detail);
    throw LoadError(e.code(), "anatomy failed validation", std::move(report));
  } catch (const Error& e) {
    throw LoadError(e.code(), "anatomy could not be read", {std::string(kAnatomyFileName) + ": " + e.what()});
  }

  AnnotationParseResult parsed;
  try {
    parsed = parse_annotations(*annotations_text, *anatomy, options);
  } catch (const Error& e) {
    throw LoadError(e.code(), "annotations could not be read",
                    {std::string(kAnnotationsFileName) + ": " + e.what()});
  }

  Palette palette = Palette::defaults();
  if (palette_text) {
    try {
      palette = Palette::from_json(*palette_text);
    } catch (const Error& e) {
      throw LoadError(e.code(), "palette could not be read", {palette_path.string() + ": " + e.what()});
    }
  }

  std::string empty;
  std::string hash = sha256_hex({&*anatomy_text, &*annotations_text, palette_text ? &*palette_text : &empty});
  std::vector<std::string> warnings = anatomy->warnings();
  warnings.insert(warnings.end(), parsed.warnings.begin(), parsed.warnings.end());
  return std::make_shared<const Snapshot>(Snapshot{std::move(*anatomy), std::move(parsed.store), std::move(palette),
                                                   version, std::move(hash), std::move(parsed.conflicts),
                                                   std::move(warnings)});
}

std::shared_ptr<const StateMap> StateCache::get_or_compute(const Snapshot& snapshot, const GeneSymbol& gene,
                                                           Stage stage, AnatomyMode mode) {
  if (capacity_ == 0)
    return std::make_shared<const StateMap>(propagate_states(snapshot.store, snapshot.anatomy, gene, stage, mode));
  std::string key = gene.key() + '|' + std::to_string(stage.value()) + '|' + std::string(to_string(mode)) + '|' +
                    std::to_string(snapshot.version);
  {
    std::lock_guard lock(mutex_);
    if (auto it = index_.find(key); it != index_.end()) {
      order_.splice(order_.begin(), order_, it->second);
      ++hits_;
      return it->second->second;
    }
    ++misses_;
  }
  // Computed outside the lock; a racing duplicate computes the same value.
  auto value =
      std::make_shared<const StateMap>(propagate_states(snapshot.store, snapshot.anatomy, gene, stage, mode));
  std::lock_guard lock(mutex_);
  if (auto it = index_.find(key); it != index_.end()) return it->second->second;
  order_.emplace_front(key, value);
  index_.emplace(std::move(key), order_.begin());
  while (order_.size() > capacity_) {
    index_.erase(order_.back().first);
    order_.pop_back();
  }
  return value;
}

std::size_t StateCache::size() const {
  std::lock_guard lock(mutex_);
  return order_.size();
}

std::size_t StateCache::hits() const {
  std::lock_guard lock(mutex_);
  return hits_;
}

std::size_t StateCache::misses() const {
  std::lock_guard lock(mutex_);
  return misses_;
}

namespace {

std::string error_body(const std::string& code, const std::string& detail) {
  JsonWriter w;
  w.begin_object();
  w.key("error").value(code);
  w.key("detail").value(detail);
  w.end_object();
  return w.take();
}

class Params {
 public:
  explicit Params(const std::map<std::string, std::string>& params) : params_(params) {}

  std::optional<std::string> get(const std::string& name) const {
    auto it = params_.find(name);
    if (it == params_.end()) return std::nullopt;
    return it->second;
  }
  std::string required(const std::string& name) const {
    auto v = get(name);
    if (!v || v->empty()) throw InvalidArgument("missing_parameter", "parameter '" + name + "' is required");
    return *v;
  }

  AnatomyMode mode() const {
    auto v = get("mode");
    return v ? parse_anatomy_mode(*v) : AnatomyMode::staged;
  }
  LayoutKind kind() const {
    auto v = get("kind");
    return v ? parse_layout_kind(*v) : LayoutKind::sunburst;
  }
  std::optional<Stage> stage() const {
    auto v = get("stage");
    if (!v) return std::nullopt;
    return Stage::parse(*v);
  }
  // Stage is mandatory unless the mode is abstract.
  Stage stage_for(AnatomyMode mode) const {
    if (auto s = stage()) return *s;
    if (mode == AnatomyMode::abstract) return Stage(kMinStage);
    throw InvalidArgument("missing_parameter", "parameter 'stage' is required");
  }
  int integer(const std::string& name, int fallback, int lo, int hi) const {
    auto v = get(name);
    if (!v) return fallback;
    int out = 0;
    auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
    if (ec != std::errc() || ptr != v->data() + v->size() || out < lo || out > hi)
      throw InvalidArgument("bad_" + name, "parameter '" + name + "' must be an integer in [" + std::to_string(lo) +
                                               ", " + std::to_string(hi) + "]");
    return out;
  }

 private:
  const std::map<std::string, std::string>& params_;
};

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t comma = text.find(',', start);
    if (comma == std::string::npos) comma = text.size();
    if (comma == start) throw InvalidArgument("bad_list", "empty item in list '" + text + "'");
    out.push_back(text.substr(start, comma - start));
    start = comma + 1;
  }
  return out;
}

// Accepts abstract ids and staged aliases; returns the abstract id.
StructureId structure_param(const Snapshot& snap, const std::string& text) {
  StructureId id = StructureId::parse(text);
  if (!id.is_abstract()) return snap.anatomy.resolve_alias(id);
  if (!snap.anatomy.find(id)) throw NotFound("unknown_structure", id.str() + " is not in the anatomy");
  return id;
}

std::string meta_document(const Snapshot& snap) {
  JsonWriter w;
  w.begin_object();
  w.key("stages").value(kStageCount);
  w.key("version").value(static_cast<std::int64_t>(snap.version));
  w.key("hash").value(snap.content_hash);
  w.key("counts").begin_object();
  w.key("structures").value(static_cast<std::int64_t>(snap.anatomy.size()));
  w.key("annotations").value(static_cast<std::int64_t>(snap.store.size()));
  w.key("genes").value(static_cast<std::int64_t>(snap.store.gene_count()));
  w.end_object();
  w.key("populated_stages").begin_array();
  for (int s = kMinStage; s <= kMaxStage; ++s)
    if (!snap.store.at_stage(Stage(s)).empty()) w.value(s);
  w.end_array();
  w.end_object();
  return w.take();
}

std::string anatomy_document(const Snapshot& snap, AnatomyMode mode, Stage stage) {
  const TreeView& view = mode == AnatomyMode::staged ? snap.anatomy.staged_view(stage) : snap.anatomy.abstract_view();
  JsonWriter w;
  w.begin_object();
  w.key("mode").value(to_string(mode));
  if (mode == AnatomyMode::staged) w.key("stage").value(stage.value());
  w.key("root").value(view[0].id.str());
  w.key("max_depth").value(view.max_depth());
  w.key("nodes").begin_array();
  for (std::size_t i = 0; i < view.size(); ++i) {
    const Structure& s = snap.anatomy.structure(view[i].structure);
    w.begin_object();
    w.key("id").value(s.id.str());
    w.key("name").value(s.name);
    if (s.abbreviation) w.key("abbr").value(*s.abbreviation);
    if (view[i].parent >= 0) w.key("parent").value(view[static_cast<std::size_t>(view[i].parent)].id.str());
    w.key("depth").value(view[i].depth);
    if (s.is_major_system) w.key("major_system").value(true);
    if (mode == AnatomyMode::staged) {
      if (auto it = s.aliases.find(stage.value()); it != s.aliases.end()) w.key("staged_id").value(it->second.str());
    }
    w.end_object();
  }
  w.end_array();
  w.end_object();
  return w.take();
}

GridSpec grid_spec(const Params& p) {
  GridSpec spec;
  spec.mode = p.mode();
  spec.kind = p.kind();
  std::vector<GeneSymbol> genes;
  for (const auto& g : split_list(p.required("genes"))) genes.emplace_back(g);
  std::vector<Stage> stages;
  for (const auto& s : split_list(p.required("stages"))) stages.push_back(Stage::parse(s));
  for (const auto& g : genes)
    for (Stage s : stages) spec.cells.emplace_back(g, s);
  spec.columns = p.integer("columns", static_cast<int>(stages.size()), 1, 1024);
  return spec;
}

Response route(const Request& req, const Snapshot& snap, StateCache* cache) {
  Params p(req.params);
  std::string path = req.path;
  if (path.size() > 1 && path.back() == '/') path.pop_back();
  Response res;
  res.version = snap.version;

  StateLookup lookup;
  if (cache)
    lookup = [&](const GeneSymbol& g, Stage s, AnatomyMode m) { return cache->get_or_compute(snap, g, s, m); };

  static const std::string prefix = "/api/v1/";
  if (path.rfind(prefix, 0) != 0) throw NotFound("unknown_route", "no route for " + path);
  if (req.method != "GET") throw Error("method_not_allowed", req.method + " is not allowed on " + path);
  const std::string name = path.substr(prefix.size());

  if (name == "meta") {
    res.body = meta_document(snap);
  } else if (name == "anatomy") {
    AnatomyMode mode = p.mode();
    res.body = anatomy_document(snap, mode, p.stage_for(mode));
  } else if (name == "layout") {
    AnatomyMode mode = p.mode();
    Stage stage = p.stage_for(mode);
    LayoutParams params;
    params.kind = p.kind();
    const TreeView& base = mode == AnatomyMode::staged ? snap.anatomy.staged_view(stage) : snap.anatomy.abstract_view();
    std::optional<TreeView> zoomed;
    if (auto root = p.get("root")) zoomed = subtree_view(base, structure_param(snap, *root));
    Geometry g = compute_layout(zoomed ? *zoomed : base, params);
    res.body = geometry_document(g, mode, p.stage());
  } else if (name == "expression") {
    GeneSymbol gene(p.required("gene"));
    AnatomyMode mode = p.mode();
    Stage stage = Stage::parse(p.required("stage"));
    std::shared_ptr<const StateMap> states =
        cache ? cache->get_or_compute(snap, gene, stage, mode)
              : std::make_shared<const StateMap>(propagate_states(snap.store, snap.anatomy, gene, stage, mode));
    JsonWriter w;
    w.begin_object();
    w.key("gene").value(gene.text());
    w.key("stage").value(stage.value());
    w.key("mode").value(to_string(mode));
    w.key("states").begin_object();
    for (std::size_t i = 0; i < states->size(); ++i)
      w.key(states->ids[i].str()).value(to_string(state_class(states->states[i])));
    w.end_object();
    w.key("profile").begin_array();
    for (const auto& id : expression_profile(snap.store, snap.anatomy, gene, stage)) w.value(id.str());
    w.end_array();
    w.end_object();
    res.body = w.take();
  } else if (name == "subset") {
    GeneSymbol g1(p.required("g1"));
    GeneSymbol g2(p.required("g2"));
    Stage stage = Stage::parse(p.required("stage"));
    SubsetResult r = profile_subset(snap.store, snap.anatomy, g1, g2, stage);
    JsonWriter w;
    w.begin_object();
    w.key("g1").value(g1.text());
    w.key("g2").value(g2.text());
    w.key("stage").value(stage.value());
    w.key("subset").value(r.subset);
    if (r.witness) w.key("witness").value(r.witness->str());
    w.end_object();
    res.body = w.take();
  } else if (name == "compose") {
    res.body = grid_document(compose_grid(snap.anatomy, snap.store, grid_spec(p), snap.palette, lookup));
  } else if (name == "render.svg") {
    GridSpec spec = grid_spec(p);
    int size = p.integer("size", 400, 1, 8192);
    res.body = render_grid_svg(compose_grid(snap.anatomy, snap.store, spec, snap.palette, lookup), size);
    res.content_type = "image/svg+xml";
  } else if (name == "cloud") {
    Stage stage = Stage::parse(p.required("stage"));
    std::optional<StructureId> filter;
    if (auto s = p.get("structure")) filter = structure_param(snap, *s);
    CloudModel cloud = build_cloud(snap.store, snap.anatomy, stage, filter);
    if (auto q = p.get("q")) {
      // Keep the full-cloud positions so a search never moves nodes.
      std::string key = to_lower_ascii(*q);
      std::erase_if(cloud.nodes, [&](const CloudNode& n) { return n.gene.key().rfind(key, 0) != 0; });
    }
    res.body = cloud_document(cloud);
  } else {
    throw NotFound("unknown_route", "no route for " + path);
  }
  return res;
}

}  // namespace

Response handle_request(const Request& request, const Snapshot& snapshot, StateCache* cache) {
  auto fail = [&](int status, const std::string& code, const std::string& detail) {
    Response r;
    r.status = status;
    r.body = error_body(code, detail);
    r.version = snapshot.version;
    return r;
  };
  try {
    return route(request, snapshot, cache);
  } catch (const InvalidArgument& e) {
    return fail(400, e.code(), e.what());
  } catch (const NotFound& e) {
    return fail(404, e.code(), e.what());
  } catch (const Error& e) {
    if (e.code() == "method_not_allowed") return fail(405, e.code(), e.what());
    return fail(500, e.code(), e.what());
  } catch (const std::exception& e) {
    return fail(500, "internal", e.what());
  }
}

AtlasService::AtlasService(ServiceConfig config) : config_(std::move(config)), cache_(config_.cache_size) {
  check_config(config_);
  current_ = load_snapshot(config_, 1);
}

std::shared_ptr<const Snapshot> AtlasService::snapshot() const {
  std::lock_guard lock(swap_mutex_);
  return current_;
}

std::uint64_t AtlasService::reload() {
  std::lock_guard writer(reload_mutex_);
  const std::uint64_t next = snapshot()->version + 1;
  auto fresh = load_snapshot(config_, next);
  std::lock_guard lock(swap_mutex_);
  current_ = std::move(fresh);
  return next;
}

Response AtlasService::handle(const Request& request) {
  // One pointer copy per request: the whole response sees one version.
  std::shared_ptr<const Snapshot> snap = snapshot();
  if (request.path == "/admin/reload") {
    if (request.method != "POST") {
      Response r;
      r.status = 405;
      r.body = error_body("method_not_allowed", "use POST /admin/reload");
      r.version = snap->version;
      return r;
    }
    Response r;
    try {
      std::uint64_t v = reload();
      JsonWriter w;
      w.begin_object();
      w.key("version").value(static_cast<std::int64_t>(v));
      w.end_object();
      r.body = w.take();
      r.version = v;
    } catch (const LoadError& e) {
      std::string detail = e.what();
      for (const auto& line : e.report()) detail += "\n" + line;
      r.status = 422;
      r.body = error_body("reload_failed", detail);
      r.version = snap->version;
    }
    return r;
  }
  return handle_request(request, *snap, config_.cache_size ? &cache_ : nullptr);
}

struct HttpServer::Impl {
  AtlasService& service;
  httplib::Server server;

  explicit Impl(AtlasService& s) : service(s) {
    auto dispatch = [this](const httplib::Request& in, httplib::Response& out) {
      Request req;
      req.method = in.method;
      req.path = in.path;
      for (const auto& [k, v] : in.params) req.params.emplace(k, v);  // first value wins
      Response res = service.handle(req);
      out.status = res.status;
      out.set_header("X-Snapshot-Version", std::to_string(res.version));
      out.set_content(res.body, res.content_type);
    };
    server.Get(".*", dispatch);
    server.Post(".*", dispatch);
  }
};

HttpServer::HttpServer(AtlasService& service) : impl_(std::make_unique<Impl>(service)) {}
HttpServer::~HttpServer() = default;

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  if (!impl_->server.bind_to_port(host, port)) return -1;
  return port;
}

void HttpServer::run() { impl_->server.listen_after_bind(); }

void HttpServer::stop() { impl_->server.stop(); }

}  // namespace atlasburst
