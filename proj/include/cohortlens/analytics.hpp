#pragma once

// Request-level analytics shared by the HTTP service and the CLI. Every
// function turns (dataset, query parameters) into the exact response body,
// so both front ends emit byte-identical JSON.

#include <map>
#include <memory>
#include <string>
#include <string_view>

#include <json.hpp>

#include "cohortlens/arm.hpp"
#include "cohortlens/cluster.hpp"
#include "cohortlens/filament.hpp"
#include "cohortlens/model.hpp"
#include "cohortlens/rule_graph.hpp"
#include "cohortlens/stats.hpp"

namespace cohortlens {

using Json = nlohmann::ordered_json;
using Query = std::map<std::string, std::string, std::less<>>;

struct LoadedDataset {
  std::string dataset_id;
  CohortDataset raw;
  CohortDataset imputed;

  /// Parses, imputes and hashes the canonical form.
  static std::shared_ptr<const LoadedDataset> from_csv(std::string_view patients_csv,
                                                       std::string_view ratings_csv);
};

/// Content address of a dataset: SHA-256 over its canonical CSV form.
std::string dataset_id_of(const CohortDataset& dataset);

/// Compact JSON text with shortest round-trip floats.
std::string to_text(const Json& j);

/// Rounds to 6 fractional digits (and clears negative zero).
double round6(double v);

Json to_json(const cluster::ClusterView& view);
Json to_json(const arm::MiningResult& mining, const graph::RuleGraph* graph,
             const graph::LayoutResult* layout);
Json rule_graph_json(const graph::RuleGraph& graph, const graph::LayoutResult& layout);

std::string symptoms_body();
std::string clusters_body(const LoadedDataset& data, const Query& query);
std::string rules_body(const LoadedDataset& data, const Query& query);
std::string filaments_body(const LoadedDataset& data, const Query& query);
std::string heatmap_body(const LoadedDataset& data, const Query& query);
std::string correlations_body(const LoadedDataset& data, const Query& query);
std::string prevalence_body(const LoadedDataset& data, const Query& query);
std::string patient_body(const LoadedDataset& data, std::string_view patient_id);

/// Parameter helpers; they throw Error with codes the front ends map to
/// 404/422 or exit code 2.
std::size_t require_timepoint(std::string_view text);
std::size_t require_symptom(std::string_view text);
Phase require_phase(std::string_view text);

}  // namespace cohortlens
