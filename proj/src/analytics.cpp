#include "cohortlens/analytics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "cohortlens/error.hpp"
#include "cohortlens/hash.hpp"

namespace cohortlens {

namespace {

std::vector<std::string> split_list(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find(',', start);
    if (end == std::string_view::npos) end = text.size();
    auto item = text.substr(start, end - start);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    if (!item.empty()) out.emplace_back(item);
    start = end + 1;
  }
  return out;
}

const std::string* find(const Query& q, std::string_view key) {
  auto it = q.find(key);
  return it == q.end() ? nullptr : &it->second;
}

double get_double(const Query& q, std::string_view key, double fallback) {
  const auto* v = find(q, key);
  if (!v) return fallback;
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
  if (ec != std::errc{} || ptr != v->data() + v->size() || v->empty() || !std::isfinite(out)) {
    throw Error(ErrorCode::InvalidArgument, std::string(key) + " must be a number");
  }
  return out;
}

long long get_int(const Query& q, std::string_view key, long long fallback) {
  const auto* v = find(q, key);
  if (!v) return fallback;
  long long out = 0;
  auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
  if (ec != std::errc{} || ptr != v->data() + v->size() || v->empty()) {
    throw Error(ErrorCode::InvalidArgument, std::string(key) + " must be an integer");
  }
  return out;
}

bool get_bool(const Query& q, std::string_view key, bool fallback) {
  const auto* v = find(q, key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1") return true;
  if (*v == "false" || *v == "0") return false;
  throw Error(ErrorCode::InvalidArgument, std::string(key) + " must be true or false");
}

std::string tp_label(std::size_t tp) { return std::string(time_grid()[tp].label); }
std::string symptom_id(std::size_t s) { return std::string(symptoms()[s].id); }

Json nullable(const std::optional<double>& v) {
  return v ? Json(round6(*v)) : Json(nullptr);
}

}  // namespace

namespace {

void write_json(const Json& j, std::string& out) {
  switch (j.type()) {
    case Json::value_t::object: {
      out += '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ',';
        first = false;
        out += Json(it.key()).dump();
        out += ':';
        write_json(it.value(), out);
      }
      out += '}';
      break;
    }
    case Json::value_t::array: {
      out += '[';
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ',';
        write_json(j[i], out);
      }
      out += ']';
      break;
    }
    case Json::value_t::number_float: {
      const double v = j.get<double>();
      if (!std::isfinite(v)) {
        out += "null";
        break;
      }
      char buf[32];
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
      std::string_view text(buf, static_cast<std::size_t>(ptr - buf));
      out += text;
      // Keep floats recognisable as floats, matching nlohmann's "1.0".
      if (text.find_first_of(".e") == std::string_view::npos) out += ".0";
      break;
    }
    default:
      out += j.dump();
  }
}

}  // namespace

std::string to_text(const Json& j) {
  std::string out;
  write_json(j, out);
  return out;
}

double round6(double v) {
  const double r = std::round(v * 1e6) / 1e6;
  return r == 0.0 ? 0.0 : r;
}

std::string dataset_id_of(const CohortDataset& dataset) {
  const auto canonical = serialize_dataset(dataset);
  std::string material = canonical.patients;
  material.push_back('\0');
  material += canonical.ratings;
  return sha256_hex(material).substr(0, 32);
}

std::shared_ptr<const LoadedDataset> LoadedDataset::from_csv(std::string_view patients_csv,
                                                             std::string_view ratings_csv) {
  auto out = std::make_shared<LoadedDataset>();
  out->raw = parse_dataset(patients_csv, ratings_csv);
  out->imputed = impute(out->raw);
  out->dataset_id = dataset_id_of(out->raw);
  return out;
}

std::size_t require_timepoint(std::string_view text) {
  auto tp = timepoint_index(text);
  if (!tp) {
    throw Error(ErrorCode::UnknownTimepointLabel, "unknown timepoint '" + std::string(text) + "'");
  }
  return *tp;
}

std::size_t require_symptom(std::string_view text) {
  auto s = symptom_index(text);
  if (!s) throw Error(ErrorCode::UnknownSymptom, "unknown symptom '" + std::string(text) + "'");
  return *s;
}

Phase require_phase(std::string_view text) {
  auto p = parse_phase(text);
  if (!p) throw Error(ErrorCode::UnknownPhase, "phase must be baseline, acute or late");
  return *p;
}

// ---------------------------------------------------------------------------

std::string symptoms_body() {
  Json out;
  out["manifest_version"] = std::string(kManifestVersion);
  Json list = Json::array();
  for (const auto& s : symptoms()) {
    list.push_back({{"id", std::string(s.id)}, {"category", std::string(to_string(s.category))}});
  }
  out["symptoms"] = std::move(list);
  Json grid = Json::array();
  for (const auto& tp : time_grid()) {
    grid.push_back({{"index", tp.index},
                    {"label", std::string(tp.label)},
                    {"phase", std::string(to_string(tp.phase))},
                    {"day_offset", tp.day_offset}});
  }
  out["timepoints"] = std::move(grid);
  return to_text(out);
}

Json to_json(const cluster::ClusterView& view) {
  Json out;
  out["timepoint"] = tp_label(view.timepoint);
  out["k"] = view.k;
  Json syms = Json::array();
  for (auto s : view.symptoms) syms.push_back(symptom_id(s));
  out["symptoms"] = std::move(syms);
  out["variance"] = {round6(view.variances[0]), round6(view.variances[1])};
  out["warnings"] = view.warnings;
  Json points = Json::array();
  for (const auto& p : view.points) {
    points.push_back({{"patient_id", p.patient_id},
                      {"pc1", round6(p.pc1)},
                      {"pc2", round6(p.pc2)},
                      {"burden", cluster::burden_label(p.cluster, view.k)},
                      {"cluster", p.cluster},
                      {"therapy", std::string(to_string(p.therapy))},
                      {"gender", std::string(to_string(p.gender))},
                      {"t_category", std::string(to_string(p.t_category))}});
  }
  out["points"] = std::move(points);
  return out;
}

std::string clusters_body(const LoadedDataset& data, const Query& query) {
  const auto* tp_text = find(query, "timepoint");
  const std::size_t tp = require_timepoint(tp_text ? *tp_text : "wk0");
  std::vector<std::size_t> subset;
  if (const auto* list = find(query, "symptoms")) {
    for (const auto& id : split_list(*list)) subset.push_back(require_symptom(id));
    if (subset.empty()) throw Error(ErrorCode::EmptySymptomSubset, "symptoms must not be empty");
  } else {
    for (std::size_t s = 0; s < kSymptomCount; ++s) subset.push_back(s);
  }
  const long long k = get_int(query, "k", 2);
  if (k < 1 || k > 20) throw Error(ErrorCode::InvalidArgument, "k must be in 1..20");
  return to_text(to_json(cluster::recluster(data.imputed, tp, subset, static_cast<std::size_t>(k))));
}

// ---------------------------------------------------------------------------

Json rule_graph_json(const graph::RuleGraph& g, const graph::LayoutResult& layout) {
  double smin = 1e300, smax = -1e300, lmin = 1e300, lmax = -1e300;
  for (const auto& n : g.nodes) {
    if (n.kind != graph::NodeKind::Rule) continue;
    smin = std::min(smin, n.support);
    smax = std::max(smax, n.support);
    lmin = std::min(lmin, n.lift);
    lmax = std::max(lmax, n.lift);
  }
  Json nodes = Json::array();
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto& n = g.nodes[i];
    Json node;
    node["id"] = n.id;
    node["kind"] = n.kind == graph::NodeKind::Rule ? "rule" : "symptom";
    node["x"] = round6(layout.positions[i][0]);
    node["y"] = round6(layout.positions[i][1]);
    if (n.kind == graph::NodeKind::Rule) {
      const auto vis = graph::node_visuals(n.support, n.lift, {smin, smax}, {lmin, lmax});
      node["radius"] = round6(vis.radius);
      node["shade"] = round6(vis.shade);
      node["support"] = round6(n.support);
      node["lift"] = round6(n.lift);
    } else {
      node["label"] = symptom_id(n.symptom);
    }
    nodes.push_back(std::move(node));
  }
  Json edges = Json::array();
  for (const auto& e : g.edges) edges.push_back({{"from", g.nodes[e.from].id}, {"to", g.nodes[e.to].id}});
  Json out;
  out["nodes"] = std::move(nodes);
  out["edges"] = std::move(edges);
  out["seed"] = layout.seed;
  out["mds_stress"] = round6(layout.mds_stress);
  return out;
}

Json to_json(const arm::MiningResult& mining, const graph::RuleGraph* g,
             const graph::LayoutResult* layout) {
  const auto& p = mining.params;
  Json out;
  out["phase"] = std::string(to_string(p.phase));
  out["min_support"] = round6(p.min_support);
  out["min_lift"] = round6(p.min_lift);
  out["top_k"] = p.top_k;
  out["presence_threshold"] = p.presence_threshold;
  out["max_itemset_size"] = p.max_itemset_size;
  out["merge_baseline"] = p.merge_baseline_into_acute;
  out["transaction_count"] = mining.transaction_count;
  Json rules = Json::array();
  for (const auto& r : mining.rules) {
    rules.push_back({{"id", r.rule_id},
                     {"antecedent", arm::ids_of(r.antecedent)},
                     {"consequent", arm::ids_of(r.consequent)},
                     {"support", round6(r.support().value())},
                     {"lift", round6(r.lift.value())}});
  }
  out["rules"] = std::move(rules);
  if (g && layout) {
    out["graph"] = rule_graph_json(*g, *layout);
  } else {
    out["graph"] = {{"nodes", Json::array()}, {"edges", Json::array()}};
  }
  return out;
}

std::string rules_body(const LoadedDataset& data, const Query& query) {
  arm::MiningParams params;
  if (const auto* phase = find(query, "phase")) params.phase = require_phase(*phase);
  params.min_support = get_double(query, "min_support", params.min_support);
  params.min_lift = get_double(query, "min_lift", params.min_lift);
  const long long top_k = get_int(query, "top_k", static_cast<long long>(params.top_k));
  if (top_k < 1) throw Error(ErrorCode::InvalidArgument, "top_k must be >= 1");
  params.top_k = static_cast<std::size_t>(top_k);
  const long long threshold = get_int(query, "presence_threshold", params.presence_threshold);
  if (threshold < 1 || threshold > 10) {
    throw Error(ErrorCode::InvalidArgument, "presence_threshold must be in 1..10");
  }
  params.presence_threshold = static_cast<int>(threshold);
  const long long max_size = get_int(query, "max_itemset_size", static_cast<long long>(params.max_itemset_size));
  if (max_size < 2 || max_size > static_cast<long long>(kSymptomCount)) {
    throw Error(ErrorCode::InvalidArgument, "max_itemset_size must be in 2..28");
  }
  params.max_itemset_size = static_cast<std::size_t>(max_size);
  params.merge_baseline_into_acute = get_bool(query, "merge_baseline", false);
  const long long seed = get_int(query, "seed", 0);
  if (seed < 0) throw Error(ErrorCode::InvalidArgument, "seed must be >= 0");

  const auto mining = arm::mine_rules(data.raw, params);
  if (mining.rules.empty()) return to_text(to_json(mining, nullptr, nullptr));
  const auto g = graph::build_graph(mining.rules);
  const auto layout = graph::layout(g, static_cast<std::uint64_t>(seed));
  return to_text(to_json(mining, &g, &layout));
}

// ---------------------------------------------------------------------------

std::string filaments_body(const LoadedDataset& data, const Query& query) {
  const auto* sym_text = find(query, "symptom");
  if (!sym_text) throw Error(ErrorCode::InvalidArgument, "symptom is required");
  const std::size_t symptom = require_symptom(*sym_text);
  const auto* mode_text = find(query, "mode");
  const std::string mode = mode_text ? *mode_text : "individual";
  if (mode != "individual" && mode != "therapy_mean") {
    throw Error(ErrorCode::InvalidArgument, "mode must be individual or therapy_mean");
  }
  std::optional<Phase> phase_highlight;
  if (const auto* ph = find(query, "phase_highlight")) phase_highlight = require_phase(*ph);

  std::vector<filament::FilamentPolyline> filaments;
  std::vector<std::string> highlighted;
  if (const auto* h = find(query, "highlight")) highlighted = split_list(*h);
  if (mode == "individual") {
    std::vector<std::size_t> rows;
    if (const auto* list = find(query, "patients")) {
      for (const auto& id : split_list(*list)) {
        auto row = data.imputed.find_patient(id);
        if (!row) throw Error(ErrorCode::UnknownPatient, "unknown patient '" + id + "'");
        rows.push_back(*row);
      }
      if (rows.size() == 1 && highlighted.empty()) {
        highlighted.push_back(data.imputed.patients()[rows.front()].patient_id);
      }
    }
    for (const auto& id : highlighted) {
      if (!data.imputed.find_patient(id)) {
        throw Error(ErrorCode::UnknownPatient, "unknown patient '" + id + "'");
      }
    }
    filaments = filament::patient_filaments(data.imputed, symptom, rows);
  } else {
    filaments = filament::therapy_mean_filaments(data.imputed, symptom);
  }
  for (auto& f : filaments) {
    f.highlight = std::find(highlighted.begin(), highlighted.end(), f.owner) != highlighted.end();
  }

  Json out;
  out["symptom"] = symptom_id(symptom);
  out["mode"] = mode;
  out["phase_highlight"] = phase_highlight ? Json(std::string(to_string(*phase_highlight))) : Json(nullptr);
  Json list = Json::array();
  for (const auto& f : filaments) {
    Json vertices = Json::array();
    for (const auto& v : f.vertices) {
      vertices.push_back({{"x", round6(v.x)},
                          {"y", round6(v.y)},
                          {"tp", v.timepoint},
                          {"reported", v.reported},
                          {"in_phase", phase_highlight && phase_of(v.timepoint) == *phase_highlight}});
    }
    list.push_back({{"owner", f.owner}, {"highlight", f.highlight}, {"vertices", std::move(vertices)}});
  }
  out["filaments"] = std::move(list);
  return to_text(out);
}

// ---------------------------------------------------------------------------

std::string heatmap_body(const LoadedDataset& data, const Query& query) {
  std::optional<std::size_t> patient;
  if (const auto* pid = find(query, "patient_id")) {
    patient = data.raw.find_patient(*pid);
    if (!patient) throw Error(ErrorCode::UnknownPatient, "unknown patient '" + *pid + "'");
  }
  const auto cells = stats::heatmap(data.raw);

  Json out;
  out["cohort_size"] = data.raw.size();
  out["bins"] = {"0", "1-5", "6-9", "10"};
  out["patient_id"] = patient ? Json(data.raw.patients()[*patient].patient_id) : Json(nullptr);
  Json groups = Json::array();
  for (auto category : {SymptomCategory::Core, SymptomCategory::HncSpecific, SymptomCategory::Interference}) {
    Json rows = Json::array();
    for (std::size_t s = 0; s < kSymptomCount; ++s) {
      if (symptoms()[s].category != category) continue;
      Json row_cells = Json::array();
      for (std::size_t t = 0; t < kTimepointCount; ++t) {
        const auto& c = cells[s * kTimepointCount + t];
        Json cell;
        cell["tp"] = tp_label(t);
        cell["bins"] = {round6(c.bin_fractions[0]), round6(c.bin_fractions[1]),
                        round6(c.bin_fractions[2]), round6(c.bin_fractions[3])};
        cell["reporters"] = c.reporters;
        cell["reporting_fraction"] = round6(c.reporting_fraction);
        if (patient) {
          const auto& series = data.raw.series(*patient, s);
          cell["patient_rating"] =
              series.reported[t] ? Json(static_cast<int>(*series.values[t])) : Json(nullptr);
        }
        row_cells.push_back(std::move(cell));
      }
      rows.push_back({{"symptom", symptom_id(s)}, {"cells", std::move(row_cells)}});
    }
    groups.push_back({{"category", std::string(to_string(category))}, {"rows", std::move(rows)}});
  }
  out["groups"] = std::move(groups);
  return to_text(out);
}

std::string correlations_body(const LoadedDataset& data, const Query& query) {
  const auto* tp_text = find(query, "timepoint");
  const std::size_t tp = require_timepoint(tp_text ? *tp_text : "wk0");
  std::optional<std::size_t> selected;
  if (const auto* s = find(query, "symptom")) selected = require_symptom(*s);
  const auto matrix = stats::spearman_matrix(data.raw, tp);

  Json out;
  out["timepoint"] = tp_label(tp);
  out["symptom"] = selected ? Json(symptom_id(*selected)) : Json(nullptr);
  Json entries = Json::array();
  for (const auto& e : matrix) {
    const bool keep = selected ? e.a == *selected : e.a <= e.b;
    if (!keep) continue;
    entries.push_back(
        {{"a", symptom_id(e.a)}, {"b", symptom_id(e.b)}, {"rho", nullable(e.rho)}, {"n", e.n}});
  }
  out["entries"] = std::move(entries);
  return to_text(out);
}

std::string prevalence_body(const LoadedDataset& data, const Query& query) {
  const auto* sym_text = find(query, "symptom");
  if (!sym_text) throw Error(ErrorCode::InvalidArgument, "symptom is required");
  const std::size_t symptom = require_symptom(*sym_text);
  const auto* tp_text = find(query, "timepoint");
  const std::size_t tp = require_timepoint(tp_text ? *tp_text : "wk0");
  const long long threshold = get_int(query, "presence_threshold", 1);
  if (threshold < 1 || threshold > 10) {
    throw Error(ErrorCode::InvalidArgument, "presence_threshold must be in 1..10");
  }
  const double value = stats::prevalence(data.raw, symptom, tp, static_cast<int>(threshold));
  Json out;
  out["symptom"] = symptom_id(symptom);
  out["timepoint"] = tp_label(tp);
  out["presence_threshold"] = threshold;
  out["prevalence"] = round6(value);
  return to_text(out);
}

std::string patient_body(const LoadedDataset& data, std::string_view patient_id) {
  const auto row = data.imputed.find_patient(patient_id);
  if (!row) throw Error(ErrorCode::UnknownPatient, "unknown patient '" + std::string(patient_id) + "'");
  const auto& p = data.imputed.patients()[*row];
  Json out;
  out["patient_id"] = p.patient_id;
  out["age"] = p.age;
  out["gender"] = std::string(to_string(p.gender));
  out["t_category"] = std::string(to_string(p.t_category));
  out["therapy"] = std::string(to_string(p.therapy));
  out["total_dose"] = p.total_dose ? Json(round6(*p.total_dose)) : Json(nullptr);
  out["questionnaires"] = data.imputed.questionnaire_count(*row);
  Json series = Json::array();
  for (std::size_t s = 0; s < kSymptomCount; ++s) {
    const auto& imputed = data.imputed.series(*row, s);
    Json values = Json::array();
    Json reported = Json::array();
    for (std::size_t t = 0; t < kTimepointCount; ++t) {
      values.push_back(static_cast<int>(*imputed.values[t]));
      reported.push_back(imputed.reported[t]);
    }
    series.push_back({{"symptom", symptom_id(s)},
                      {"category", std::string(to_string(symptoms()[s].category))},
                      {"values", std::move(values)},
                      {"reported", std::move(reported)}});
  }
  out["series"] = std::move(series);
  return to_text(out);
}

}  // namespace cohortlens
