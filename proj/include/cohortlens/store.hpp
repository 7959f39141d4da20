#pragma once

#include <cstddef>
#include <filesystem>
#include <list>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cohortlens/analytics.hpp"

namespace cohortlens {

enum class DatasetStatus { Ingesting, Ready, Failed };
std::string_view to_string(DatasetStatus status);

struct DatasetHandle {
  std::string dataset_id;
  std::string name;
  std::string created_at;  // ISO-8601 UTC
  std::size_t patient_count = 0;
  DatasetStatus status = DatasetStatus::Ready;
  std::size_t partial_questionnaires = 0;

  Json to_json() const;
};

/// Content-addressed dataset directory. Each dataset lives in
/// `<root>/<dataset_id>/` holding canonical CSVs and manifest.json. A dataset
/// directory appears only after a complete write (staged then renamed).
class DatasetStore {
 public:
  explicit DatasetStore(std::filesystem::path root);

  struct IngestResult {
    DatasetHandle handle;
    bool created = false;
  };

  /// Parses, validates and imputes, then persists. Identical content returns
  /// the existing handle. Throws ValidationError on bad input.
  IngestResult ingest(std::string_view name, std::string_view patients_csv,
                      std::string_view ratings_csv);

  std::vector<DatasetHandle> list() const;
  std::optional<DatasetHandle> handle(std::string_view dataset_id) const;

  /// Loaded dataset, kept in memory after the first load. Throws
  /// Error(UnknownDataset).
  std::shared_ptr<const LoadedDataset> load(std::string_view dataset_id);

  bool remove(std::string_view dataset_id);

  const std::filesystem::path& root() const { return root_; }

 private:
  std::filesystem::path dir_of(std::string_view dataset_id) const;
  std::mutex& lock_for(const std::string& dataset_id);

  std::filesystem::path root_;
  mutable std::mutex mutex_;
  std::map<std::string, std::unique_ptr<std::mutex>, std::less<>> id_locks_;
  std::map<std::string, std::shared_ptr<const LoadedDataset>, std::less<>> loaded_;
};

/// Bounded LRU of rendered response bodies. Never authoritative: a miss just
/// means the body is recomputed.
class ResultCache {
 public:
  explicit ResultCache(std::size_t capacity) : capacity_(capacity) {}

  std::shared_ptr<const std::string> get(const std::string& key);
  void put(const std::string& key, std::shared_ptr<const std::string> body);
  void erase_prefix(std::string_view prefix);
  std::size_t size() const;

 private:
  using Entry = std::pair<std::string, std::shared_ptr<const std::string>>;
  std::size_t capacity_;
  mutable std::mutex mutex_;
  std::list<Entry> order_;  // most recent first
  std::unordered_map<std::string, std::list<Entry>::iterator> index_;
};

}  // namespace cohortlens
