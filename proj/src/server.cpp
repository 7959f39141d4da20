#include "cohortlens/server.hpp"

#include <httplib.h>

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <iostream>

#include "cohortlens/error.hpp"
#include "cohortlens/hash.hpp"

namespace cohortlens {

namespace {

constexpr std::string_view kPrefix = "/api/v1";
constexpr std::size_t kMaxReportedViolations = 20;

std::vector<std::string> split_path(std::string_view path) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (start < path.size()) {
    auto end = path.find('/', start);
    if (end == std::string_view::npos) end = path.size();
    if (end > start) parts.emplace_back(path.substr(start, end - start));
    start = end + 1;
  }
  return parts;
}

ApiResponse json_response(int status, const Json& body) { return {status, to_text(body), "application/json", {}}; }

ApiResponse error_response(const Error& e) {
  Json err;
  err["code"] = std::string(to_string(e.code()));
  err["message"] = e.what();
  int status = http_status_for(e.code());
  if (const auto* v = dynamic_cast<const ValidationError*>(&e)) {
    status = 400;
    Json list = Json::array();
    const auto& items = v->violations();
    for (std::size_t i = 0; i < items.size() && i < kMaxReportedViolations; ++i) {
      list.push_back({{"code", std::string(to_string(items[i].code))},
                      {"file", items[i].file},
                      {"row", items[i].row},
                      {"column", items[i].column},
                      {"message", items[i].message}});
    }
    err["violations"] = std::move(list);
    err["violation_count"] = items.size();
  }
  return json_response(status, {{"error", std::move(err)}});
}

ApiResponse plain_error(int status, std::string_view code, std::string_view message) {
  return json_response(status, {{"error", {{"code", std::string(code)}, {"message", std::string(message)}}}});
}

}  // namespace

int http_status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownDataset:
    case ErrorCode::UnknownPatient:
    case ErrorCode::UnknownSymptom:
      return 404;
    case ErrorCode::PayloadTooLarge:
      return 413;
    case ErrorCode::MalformedCsv:
    case ErrorCode::RatingOutOfRange:
    case ErrorCode::DuplicateCell:
    case ErrorCode::DuplicatePatient:
      return 400;
    case ErrorCode::Io:
      return 500;
    default:
      return 422;
  }
}

std::string etag_of(const std::string& body) { return "\"" + sha256_hex(body).substr(0, 32) + "\""; }

void ServerConfig::set_listen(const std::string& listen) {
  const auto colon = listen.rfind(':');
  if (colon == std::string::npos) throw Error(ErrorCode::InvalidArgument, "listen must be host:port");
  if (colon > 0) host = listen.substr(0, colon);
  try {
    port = std::stoi(listen.substr(colon + 1));
  } catch (const std::exception&) {
    throw Error(ErrorCode::InvalidArgument, "invalid port in '" + listen + "'");
  }
  if (port < 0 || port > 65535) throw Error(ErrorCode::InvalidArgument, "port out of range");
}

void ServerConfig::apply_env() {
  if (const char* v = std::getenv("COHORTLENS_LISTEN")) set_listen(v);
  if (const char* v = std::getenv("COHORTLENS_DATA_DIR")) data_dir = v;
  if (const char* v = std::getenv("COHORTLENS_CACHE_ENTRIES")) cache_entries = std::stoul(v);
  if (const char* v = std::getenv("COHORTLENS_MAX_UPLOAD")) max_upload_bytes = std::stoul(v);
  if (const char* v = std::getenv("COHORTLENS_CORS")) {
    cors_origins.clear();
    std::string_view list = v;
    while (!list.empty()) {
      auto comma = list.find(',');
      auto item = list.substr(0, comma);
      if (!item.empty()) cors_origins.emplace_back(item);
      if (comma == std::string_view::npos) break;
      list.remove_prefix(comma + 1);
    }
  }
}

ApiService::ApiService(const ServerConfig& config)
    : config_(config), store_(config.data_dir), cache_(config.cache_entries) {}

ApiResponse ApiService::handle(const ApiRequest& request) {
  ApiResponse response;
  try {
    response = route(request);
  } catch (const Error& e) {
    response = error_response(e);
  } catch (const std::exception& e) {
    response = plain_error(500, "Internal", e.what());
  }

  if (auto it = request.headers.find("origin"); it != request.headers.end()) {
    const auto& allowed = config_.cors_origins;
    if (std::find(allowed.begin(), allowed.end(), "*") != allowed.end() ||
        std::find(allowed.begin(), allowed.end(), it->second) != allowed.end()) {
      response.headers["Access-Control-Allow-Origin"] = it->second;
      response.headers["Vary"] = "Origin";
    }
  }
  return response;
}

ApiResponse ApiService::route(const ApiRequest& request) {
  if (request.method == "OPTIONS") {
    ApiResponse r{204, "", "text/plain", {}};
    r.headers["Access-Control-Allow-Methods"] = "GET, POST, DELETE, OPTIONS";
    r.headers["Access-Control-Allow-Headers"] = "Content-Type, If-None-Match";
    return r;
  }
  if (request.path.rfind(kPrefix, 0) != 0) return plain_error(404, "NotFound", "unknown path");
  const auto parts = split_path(std::string_view(request.path).substr(kPrefix.size()));
  const auto& method = request.method;

  if (parts.size() == 1 && parts[0] == "health" && method == "GET") {
    return json_response(200, {{"status", "ok"}});
  }
  if (parts.size() == 1 && parts[0] == "symptoms" && method == "GET") {
    return {200, symptoms_body(), "application/json", {{"ETag", etag_of(symptoms_body())}}};
  }
  if (parts.empty() || parts[0] != "datasets") return plain_error(404, "NotFound", "unknown path");

  if (parts.size() == 1) {
    if (method == "POST") return ingest(request);
    if (method == "GET") {
      Json list = Json::array();
      for (const auto& h : store_.list()) list.push_back(h.to_json());
      return json_response(200, {{"datasets", std::move(list)}});
    }
    return plain_error(405, "MethodNotAllowed", "use GET or POST");
  }

  const std::string& id = parts[1];
  if (parts.size() == 2) {
    if (method == "GET") {
      auto h = store_.handle(id);
      if (!h) throw Error(ErrorCode::UnknownDataset, "unknown dataset '" + id + "'");
      return json_response(200, h->to_json());
    }
    if (method == "DELETE") {
      if (!store_.remove(id)) throw Error(ErrorCode::UnknownDataset, "unknown dataset '" + id + "'");
      cache_.erase_prefix(id + "|");
      return json_response(200, {{"deleted", id}});
    }
    return plain_error(405, "MethodNotAllowed", "use GET or DELETE");
  }

  if (method != "GET") return plain_error(405, "MethodNotAllowed", "use GET");
  if (parts.size() == 3) {
    static const std::vector<std::string> kEndpoints = {"clusters", "rules", "filaments", "heatmap",
                                                        "correlations", "prevalence"};
    if (std::find(kEndpoints.begin(), kEndpoints.end(), parts[2]) == kEndpoints.end()) {
      return plain_error(404, "NotFound", "unknown endpoint");
    }
    return cached_get(id, parts[2], request);
  }
  if (parts.size() == 4 && parts[2] == "patients") {
    ApiRequest copy = request;
    copy.params = {{"patient_id", parts[3]}};
    return cached_get(id, "patient", copy);
  }
  return plain_error(404, "NotFound", "unknown path");
}

ApiResponse ApiService::cached_get(const std::string& dataset_id, const std::string& endpoint,
                                   const ApiRequest& request) {
  std::string key = dataset_id + "|" + endpoint;
  for (const auto& [k, v] : request.params) key += "|" + k + "=" + v;

  auto body = cache_.get(key);
  if (!body) {
    const auto data = store_.load(dataset_id);
    std::string text;
    if (endpoint == "clusters") text = clusters_body(*data, request.params);
    else if (endpoint == "rules") text = rules_body(*data, request.params);
    else if (endpoint == "filaments") text = filaments_body(*data, request.params);
    else if (endpoint == "heatmap") text = heatmap_body(*data, request.params);
    else if (endpoint == "correlations") text = correlations_body(*data, request.params);
    else if (endpoint == "prevalence") text = prevalence_body(*data, request.params);
    else text = patient_body(*data, request.params.at("patient_id"));
    body = std::make_shared<const std::string>(std::move(text));
    cache_.put(key, body);
  }

  const auto tag = etag_of(*body);
  if (auto it = request.headers.find("if-none-match"); it != request.headers.end() && it->second == tag) {
    return {304, "", "application/json", {{"ETag", tag}}};
  }
  return {200, *body, "application/json", {{"ETag", tag}}};
}

ApiResponse ApiService::ingest(const ApiRequest& request) {
  std::string name = "dataset";
  std::string patients;
  std::string ratings;
  std::size_t total = request.body.size();
  if (!request.files.empty()) {
    total = 0;
    for (const auto& [k, v] : request.files) total += v.size();
  }
  if (total > config_.max_upload_bytes) {
    throw Error(ErrorCode::PayloadTooLarge, "upload exceeds " + std::to_string(config_.max_upload_bytes) + " bytes");
  }

  if (!request.files.empty()) {
    auto get = [&](const char* field) -> std::string {
      auto it = request.files.find(field);
      return it == request.files.end() ? std::string() : it->second;
    };
    patients = get("patients");
    ratings = get("ratings");
    if (auto n = get("name"); !n.empty()) name = n;
    if (!request.files.contains("patients") || !request.files.contains("ratings")) {
      throw Error(ErrorCode::InvalidArgument, "multipart upload needs 'patients' and 'ratings' parts");
    }
  } else {
    Json j;
    try {
      j = Json::parse(request.body);
    } catch (const Json::parse_error&) {
      throw Error(ErrorCode::InvalidArgument, "body must be multipart or JSON {patients_csv, ratings_csv}");
    }
    if (!j.is_object() || !j.contains("patients_csv") || !j.contains("ratings_csv") ||
        !j["patients_csv"].is_string() || !j["ratings_csv"].is_string()) {
      throw Error(ErrorCode::InvalidArgument, "JSON body needs string fields patients_csv and ratings_csv");
    }
    patients = j["patients_csv"].get<std::string>();
    ratings = j["ratings_csv"].get<std::string>();
    if (j.contains("name") && j["name"].is_string()) name = j["name"].get<std::string>();
  }

  auto result = store_.ingest(name, patients, ratings);
  return json_response(result.created ? 201 : 200, result.handle.to_json());
}

struct HttpServer::Impl {
  ServerConfig config;
  ApiService service;
  httplib::Server server;

  explicit Impl(const ServerConfig& c) : config(c), service(c) {}
};

HttpServer::HttpServer(const ServerConfig& config) : impl_(std::make_unique<Impl>(config)) {
  auto& server = impl_->server;
  server.set_payload_max_length(config.max_upload_bytes + (1u << 20));

  auto adapter = [this](const httplib::Request& req, httplib::Response& res) {
    ApiRequest request;
    request.method = req.method;
    request.path = req.path;
    for (const auto& [k, v] : req.params) request.params.emplace(k, v);
    request.body = req.body;
    request.content_type = req.get_header_value("Content-Type");
    for (const auto& [k, v] : req.headers) {
      std::string lower = k;
      std::transform(lower.begin(), lower.end(), lower.begin(),
                     [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
      request.headers[lower] = v;
    }
    for (const auto& [k, file] : req.files) request.files[k] = file.content;
    const auto response = impl_->service.handle(request);
    res.status = response.status;
    for (const auto& [k, v] : response.headers) res.set_header(k, v);
    if (response.status != 304 && response.status != 204) {
      res.set_content(response.body, response.content_type);
    }
  };
  server.Get(".*", adapter);
  server.Post(".*", adapter);
  server.Delete(".*", adapter);
  server.Options(".*", adapter);
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind() {
  auto& c = impl_->config;
  if (c.port == 0) return impl_->server.bind_to_any_port(c.host);
  return impl_->server.bind_to_port(c.host, c.port) ? c.port : -1;
}

void HttpServer::serve() { impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_) impl_->server.stop();
}

ApiService& HttpServer::service() { return impl_->service; }

bool run_server(const ServerConfig& config) {
  HttpServer server(config);
  const int port = server.bind();
  if (port < 0) return false;
  std::cerr << "cohortlens: serving on http://" << config.host << ":" << port
            << " data=" << config.data_dir << "\n";
  server.serve();
  return true;
}

}  // namespace cohortlens
