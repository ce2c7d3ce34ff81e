#pragma once

#include <cstdint>
#include <filesystem>
#include <list>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "atlasburst/anatomy.hpp"
#include "atlasburst/compose.hpp"
#include "atlasburst/errors.hpp"
#include "atlasburst/expression.hpp"

namespace atlasburst {

struct ServiceConfig {
  std::filesystem::path data_dir;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::optional<std::filesystem::path> palette_path;  // default: <data_dir>/palette.json if present
  bool strict = true;
  std::size_t cache_size = 256;  // StateMaps; 0 disables the cache
};

// Throws InvalidArgument for a port outside [1, 65535] or a missing data directory.
void check_config(const ServiceConfig& config);

struct Snapshot {
  Anatomy anatomy;
  AnnotationStore store;
  Palette palette;
  std::uint64_t version = 0;
  std::string content_hash;  // SHA-256 over the input files, hex
  ConflictReport conflicts;
  std::vector<std::string> warnings;
};

// Load failure; `report` holds one line per finding (file, line, rule).
class LoadError : public Error {
 public:
  LoadError(std::string code, const std::string& message, std::vector<std::string> report)
      : Error(std::move(code), message), report_(std::move(report)) {}
  const std::vector<std::string>& report() const noexcept { return report_; }

 private:
  std::vector<std::string> report_;
};

// Reads and validates the data directory. Throws LoadError.
std::shared_ptr<const Snapshot> load_snapshot(const ServiceConfig& config, std::uint64_t version);

struct Request {
  std::string method = "GET";
  std::string path;
  std::map<std::string, std::string> params;
};

struct Response {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
  std::uint64_t version = 0;  // sent as X-Snapshot-Version
};

// LRU of full-view StateMaps keyed by (gene, stage, mode, snapshot version).
class StateCache {
 public:
  explicit StateCache(std::size_t capacity) : capacity_(capacity) {}

  std::shared_ptr<const StateMap> get_or_compute(const Snapshot& snapshot, const GeneSymbol& gene, Stage stage,
                                                 AnatomyMode mode);
  std::size_t size() const;
  std::size_t hits() const;
  std::size_t misses() const;

 private:
  using Entry = std::pair<std::string, std::shared_ptr<const StateMap>>;

  std::size_t capacity_;
  mutable std::mutex mutex_;
  std::list<Entry> order_;  // front = most recent
  std::unordered_map<std::string, std::list<Entry>::iterator> index_;
  std::size_t hits_ = 0;
  std::size_t misses_ = 0;
};

// Routes a request against one snapshot. Never throws; errors become
// {"error": code, "detail": text} with 400/404/405 (or 500 for bugs).
// `cache` may be null.
Response handle_request(const Request& request, const Snapshot& snapshot, StateCache* cache = nullptr);

class AtlasService {
 public:
  // Loads version 1. Throws LoadError / InvalidArgument.
  explicit AtlasService(ServiceConfig config);

  std::shared_ptr<const Snapshot> snapshot() const;
  // Loads a new snapshot and swaps it in. On failure the current snapshot
  // stays live and LoadError propagates.
  std::uint64_t reload();

  // Handles GET routes and POST /admin/reload against the live snapshot.
  Response handle(const Request& request);

  const ServiceConfig& config() const { return config_; }
  StateCache& cache() { return cache_; }

 private:
  ServiceConfig config_;
  std::shared_ptr<const Snapshot> current_;
  mutable std::mutex swap_mutex_;  // guards current_ only for the pointer copy
  std::mutex reload_mutex_;        // single writer
  StateCache cache_;
};

// HTTP front end. bind() with port 0 picks a free port and returns it.
class HttpServer {
 public:
  explicit HttpServer(AtlasService& service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  int bind(const std::string& host, int port);
  void run();  // blocks until stop()
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace atlasburst
