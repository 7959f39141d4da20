#include "cohortlens/store.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <random>
#include <sstream>

#include "cohortlens/error.hpp"

namespace cohortlens {

namespace fs = std::filesystem;

std::string_view to_string(DatasetStatus status) {
  switch (status) {
    case DatasetStatus::Ingesting: return "Ingesting";
    case DatasetStatus::Ready: return "Ready";
    case DatasetStatus::Failed: return "Failed";
  }
  return "";
}

Json DatasetHandle::to_json() const {
  Json out;
  out["dataset_id"] = dataset_id;
  out["name"] = name;
  out["created_at"] = created_at;
  out["patient_count"] = patient_count;
  out["status"] = std::string(cohortlens::to_string(status));
  out["partial_questionnaires"] = partial_questionnaires;
  out["manifest_version"] = std::string(kManifestVersion);
  return out;
}

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::Io, "cannot read " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, std::string_view text) {
  std::ofstream f(path, std::ios::binary);
  f.write(text.data(), static_cast<std::streamsize>(text.size()));
  f.close();
  if (!f) throw Error(ErrorCode::Io, "cannot write " + path.string());
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::optional<DatasetHandle> read_manifest(const fs::path& dir) {
  std::error_code ec;
  if (!fs::is_regular_file(dir / "manifest.json", ec)) return std::nullopt;
  const auto j = Json::parse(read_file(dir / "manifest.json"));
  DatasetHandle h;
  h.dataset_id = j.at("dataset_id").get<std::string>();
  h.name = j.at("name").get<std::string>();
  h.created_at = j.at("created_at").get<std::string>();
  h.patient_count = j.at("patient_count").get<std::size_t>();
  h.partial_questionnaires = j.value("partial_questionnaires", std::size_t{0});
  const auto status = j.at("status").get<std::string>();
  h.status = status == "Ready" ? DatasetStatus::Ready
             : status == "Failed" ? DatasetStatus::Failed
                                  : DatasetStatus::Ingesting;
  return h;
}

bool valid_id(std::string_view id) {
  if (id.empty() || id.size() > 64) return false;
  for (char c : id) {
    if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) return false;
  }
  return true;
}

}  // namespace

DatasetStore::DatasetStore(fs::path root) : root_(std::move(root)) {
  std::error_code ec;
  fs::create_directories(root_, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create data directory " + root_.string());
  // Leftover staging directories from an interrupted ingest are never visible.
  for (const auto& entry : fs::directory_iterator(root_)) {
    if (entry.path().filename().string().rfind(".staging-", 0) == 0) fs::remove_all(entry.path(), ec);
  }
}

fs::path DatasetStore::dir_of(std::string_view dataset_id) const { return root_ / std::string(dataset_id); }

std::mutex& DatasetStore::lock_for(const std::string& dataset_id) {
  std::lock_guard guard(mutex_);
  auto& slot = id_locks_[dataset_id];
  if (!slot) slot = std::make_unique<std::mutex>();
  return *slot;
}

DatasetStore::IngestResult DatasetStore::ingest(std::string_view name, std::string_view patients_csv,
                                                std::string_view ratings_csv) {
  auto loaded = LoadedDataset::from_csv(patients_csv, ratings_csv);
  const std::string id = loaded->dataset_id;

  std::lock_guard ingest_guard(lock_for(id));
  if (auto existing = handle(id)) return {*existing, false};

  DatasetHandle h;
  h.dataset_id = id;
  h.name = std::string(name);
  h.created_at = utc_now();
  h.patient_count = loaded->raw.size();
  h.status = DatasetStatus::Ready;
  h.partial_questionnaires = loaded->raw.partial_questionnaires();

  std::random_device rd;
  const fs::path staging = root_ / (".staging-" + id + "-" + std::to_string(rd()));
  std::error_code ec;
  fs::create_directories(staging, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create " + staging.string());
  try {
    const auto canonical = serialize_dataset(loaded->raw);
    write_file(staging / "patients.csv", canonical.patients);
    write_file(staging / "ratings.csv", canonical.ratings);
    write_file(staging / "manifest.json", h.to_json().dump(2));
    fs::rename(staging, dir_of(id));
  } catch (...) {
    fs::remove_all(staging, ec);
    throw;
  }

  std::lock_guard guard(mutex_);
  loaded_[id] = std::move(loaded);
  return {h, true};
}

std::vector<DatasetHandle> DatasetStore::list() const {
  std::vector<DatasetHandle> out;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(root_, ec)) {
    const auto name = entry.path().filename().string();
    if (!valid_id(name)) continue;
    if (auto h = read_manifest(entry.path())) out.push_back(*h);
  }
  std::sort(out.begin(), out.end(),
            [](const DatasetHandle& a, const DatasetHandle& b) { return a.dataset_id < b.dataset_id; });
  return out;
}

std::optional<DatasetHandle> DatasetStore::handle(std::string_view dataset_id) const {
  if (!valid_id(dataset_id)) return std::nullopt;
  return read_manifest(dir_of(dataset_id));
}

std::shared_ptr<const LoadedDataset> DatasetStore::load(std::string_view dataset_id) {
  {
    std::lock_guard guard(mutex_);
    if (auto it = loaded_.find(dataset_id); it != loaded_.end()) return it->second;
  }
  auto h = handle(dataset_id);
  if (!h || h->status != DatasetStatus::Ready) {
    throw Error(ErrorCode::UnknownDataset, "unknown dataset '" + std::string(dataset_id) + "'");
  }
  const auto dir = dir_of(dataset_id);
  auto loaded = LoadedDataset::from_csv(read_file(dir / "patients.csv"), read_file(dir / "ratings.csv"));
  std::lock_guard guard(mutex_);
  auto [it, inserted] = loaded_.emplace(std::string(dataset_id), std::move(loaded));
  return it->second;
}

bool DatasetStore::remove(std::string_view dataset_id) {
  if (!valid_id(dataset_id)) return false;
  std::lock_guard ingest_guard(lock_for(std::string(dataset_id)));
  std::error_code ec;
  const bool existed = fs::exists(dir_of(dataset_id), ec);
  fs::remove_all(dir_of(dataset_id), ec);
  std::lock_guard guard(mutex_);
  if (auto it = loaded_.find(dataset_id); it != loaded_.end()) loaded_.erase(it);
  return existed;
}

// ---------------------------------------------------------------------------

std::shared_ptr<const std::string> ResultCache::get(const std::string& key) {
  std::lock_guard guard(mutex_);
  auto it = index_.find(key);
  if (it == index_.end()) return nullptr;
  order_.splice(order_.begin(), order_, it->second);
  return it->second->second;
}

void ResultCache::put(const std::string& key, std::shared_ptr<const std::string> body) {
  if (capacity_ == 0) return;
  std::lock_guard guard(mutex_);
  if (auto it = index_.find(key); it != index_.end()) {
    it->second->second = std::move(body);
    order_.splice(order_.begin(), order_, it->second);
    return;
  }
  order_.emplace_front(key, std::move(body));
  index_[key] = order_.begin();
  while (order_.size() > capacity_) {
    index_.erase(order_.back().first);
    order_.pop_back();
  }
}

void ResultCache::erase_prefix(std::string_view prefix) {
  std::lock_guard guard(mutex_);
  for (auto it = order_.begin(); it != order_.end();) {
    if (std::string_view(it->first).substr(0, prefix.size()) == prefix) {
      index_.erase(it->first);
      it = order_.erase(it);
    } else {
      ++it;
    }
  }
}

std::size_t ResultCache::size() const {
  std::lock_guard guard(mutex_);
  return order_.size();
}

}  // namespace cohortlens
