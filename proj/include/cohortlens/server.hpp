#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "cohortlens/analytics.hpp"
#include "cohortlens/error.hpp"
#include "cohortlens/store.hpp"

namespace cohortlens {

struct ServerConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string data_dir = "data";
  std::size_t cache_entries = 512;
  std::size_t max_upload_bytes = 256u << 20;
  /// Allowed CORS origins; "*" allows any.
  std::vector<std::string> cors_origins;

  /// Overrides fields from COHORTLENS_LISTEN, COHORTLENS_DATA_DIR,
  /// COHORTLENS_CACHE_ENTRIES, COHORTLENS_MAX_UPLOAD and COHORTLENS_CORS.
  void apply_env();
  /// "host:port" or ":port".
  void set_listen(const std::string& listen);
};

struct ApiRequest {
  std::string method;
  std::string path;
  Query params;
  std::string body;
  std::string content_type;
  std::map<std::string, std::string> files;  // multipart fields by name
  std::map<std::string, std::string> headers;  // lowercase names
};

struct ApiResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
  std::map<std::string, std::string> headers;
};

int http_status_for(ErrorCode code);

/// Transport-independent router for `/api/v1`. Thread-safe.
class ApiService {
 public:
  explicit ApiService(const ServerConfig& config);

  ApiResponse handle(const ApiRequest& request);

  DatasetStore& store() { return store_; }
  const ResultCache& cache() const { return cache_; }

 private:
  ApiResponse route(const ApiRequest& request);
  ApiResponse ingest(const ApiRequest& request);
  ApiResponse cached_get(const std::string& dataset_id, const std::string& endpoint,
                         const ApiRequest& request);

  ServerConfig config_;
  DatasetStore store_;
  ResultCache cache_;
};

/// ETag of a response body (quoted, first 128 bits of SHA-256).
std::string etag_of(const std::string& body);

/// httplib front end over ApiService.
class HttpServer {
 public:
  explicit HttpServer(const ServerConfig& config);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds config.host:config.port; port 0 picks a free port. Returns the
  /// bound port, or -1 on failure.
  int bind();
  /// Blocks until stop() is called.
  void serve();
  void stop();

  ApiService& service();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Binds and serves until the process is stopped. Returns false if the
/// socket could not be bound.
bool run_server(const ServerConfig& config);

}  // namespace cohortlens
