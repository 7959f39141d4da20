// cohortlens: batch front end over the analytics engine.
//
// Exit codes: 0 ok, 2 validation, 3 I/O, 4 internal.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "cohortlens/analytics.hpp"
#include "cohortlens/error.hpp"
#include "cohortlens/server.hpp"
#include "cohortlens/store.hpp"
#include "cohortlens/synth.hpp"

namespace fs = std::filesystem;
using namespace cohortlens;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitIo = 3;
constexpr int kExitInternal = 4;

std::string read_file(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::Io, "cannot read " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::shared_ptr<const LoadedDataset> load_dir(const std::string& dir) {
  return LoadedDataset::from_csv(read_file(fs::path(dir) / "patients.csv"),
                                 read_file(fs::path(dir) / "ratings.csv"));
}

void emit(const std::string& text, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << text << "\n";
    return;
  }
  std::ofstream f(out, std::ios::binary);
  f << text << "\n";
  if (!f) throw Error(ErrorCode::Io, "cannot write " + out);
}

std::string join(const Json& ids) {
  std::string s;
  for (const auto& id : ids) {
    if (!s.empty()) s += ';';
    s += id.get<std::string>();
  }
  return s;
}

std::string rules_csv(const std::string& body) {
  const auto j = Json::parse(body);
  std::string out = "id,antecedent,consequent,support,lift";
  for (const auto& r : j["rules"]) {
    out += "\n" + std::to_string(r["id"].get<long long>()) + "," + join(r["antecedent"]) + "," +
           join(r["consequent"]) + "," + to_text(r["support"]) + "," + to_text(r["lift"]);
  }
  return out;
}

// Adds key=value to the query only when the flag was given, so defaults live
// in one place (the analytics layer) for both CLI and API.
struct QueryBuilder {
  Query query;
  std::map<std::string, std::string> values;

  void bind(CLI::App* cmd, const std::string& flag, const std::string& key, const std::string& help) {
    cmd->add_option(flag, values[key], help);
  }
  Query build(CLI::App* cmd) {
    for (const auto& [key, value] : values) {
      std::string flag = "--" + key;
      for (auto& c : flag) if (c == '_') c = '-';
      if (cmd->count(flag) > 0) query[key] = value;
    }
    return query;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cohortlens - longitudinal symptom cohort analytics"};
  app.require_subcommand(1);

  std::string data_dir;
  std::string out;

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic cohort");
  synth::SynthOptions synth_opts;
  std::string synth_out = "cohort";
  synth_cmd->add_option("--patients", synth_opts.patients, "Number of patients (>= 2)");
  synth_cmd->add_option("--seed", synth_opts.seed, "RNG seed");
  synth_cmd->add_option("--out", synth_out, "Output directory");
  synth_cmd->add_option("--gap", synth_opts.burden_gap, "High/low burden mean gap");
  synth_cmd->add_option("--noise", synth_opts.noise_sd, "Per-rating noise standard deviation");

  // ingest
  auto* ingest_cmd = app.add_subcommand("ingest", "Validate a cohort and persist it into a store");
  std::string store_dir = "data";
  std::string name = "dataset";
  ingest_cmd->add_option("--data", data_dir, "Directory with patients.csv and ratings.csv")->required();
  ingest_cmd->add_option("--store", store_dir, "Dataset store directory");
  ingest_cmd->add_option("--name", name, "Dataset name");

  auto add_analysis = [&](const char* cmd_name, const char* help) {
    auto* cmd = app.add_subcommand(cmd_name, help);
    cmd->add_option("--data", data_dir, "Directory with patients.csv and ratings.csv")->required();
    cmd->add_option("--out,-o", out, "Write output to a file instead of stdout");
    return cmd;
  };

  auto* rules_cmd = add_analysis("rules", "Mine association rules for one phase");
  QueryBuilder rules_q;
  std::string format = "json";
  rules_q.bind(rules_cmd, "--phase", "phase", "baseline, acute or late");
  rules_q.bind(rules_cmd, "--min-support", "min_support", "Minimum support");
  rules_q.bind(rules_cmd, "--min-lift", "min_lift", "Minimum lift");
  rules_q.bind(rules_cmd, "--top-k", "top_k", "Number of rules kept");
  rules_q.bind(rules_cmd, "--presence-threshold", "presence_threshold", "Rating counted as present");
  rules_q.bind(rules_cmd, "--max-itemset-size", "max_itemset_size", "Largest itemset mined");
  rules_q.bind(rules_cmd, "--merge-baseline", "merge_baseline", "Merge baseline into acute (true/false)");
  rules_q.bind(rules_cmd, "--seed", "seed", "Layout seed");
  rules_cmd->add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));

  auto* cluster_cmd = add_analysis("cluster", "Ward clustering and PCA at one timepoint");
  QueryBuilder cluster_q;
  cluster_q.bind(cluster_cmd, "--timepoint", "timepoint", "Timepoint label or index");
  cluster_q.bind(cluster_cmd, "--symptoms", "symptoms", "Comma-separated symptom subset");
  cluster_q.bind(cluster_cmd, "--k", "k", "Number of clusters");

  auto* filaments_cmd = add_analysis("filaments", "Filament plot geometry for one symptom");
  QueryBuilder filaments_q;
  filaments_q.bind(filaments_cmd, "--symptom", "symptom", "Symptom id");
  filaments_q.bind(filaments_cmd, "--mode", "mode", "individual or therapy_mean");
  filaments_q.bind(filaments_cmd, "--patients", "patients", "Comma-separated patient ids");
  filaments_q.bind(filaments_cmd, "--highlight", "highlight", "Comma-separated highlighted patient ids");
  filaments_q.bind(filaments_cmd, "--phase-highlight", "phase_highlight", "Phase to highlight");

  auto* heatmap_cmd = add_analysis("heatmap", "Rating-bin heatmap over symptoms and timepoints");
  QueryBuilder heatmap_q;
  heatmap_q.bind(heatmap_cmd, "--patient-id", "patient_id", "Patient whose ratings are marked");

  auto* corr_cmd = add_analysis("correlations", "Spearman correlations at one timepoint");
  QueryBuilder corr_q;
  corr_q.bind(corr_cmd, "--timepoint", "timepoint", "Timepoint label or index");
  corr_q.bind(corr_cmd, "--symptom", "symptom", "Return only this symptom's row");

  auto* prev_cmd = add_analysis("prevalence", "Share of reporters at or above a threshold");
  QueryBuilder prev_q;
  prev_q.bind(prev_cmd, "--symptom", "symptom", "Symptom id");
  prev_q.bind(prev_cmd, "--timepoint", "timepoint", "Timepoint label or index");
  prev_q.bind(prev_cmd, "--presence-threshold", "presence_threshold", "Rating counted as present");

  auto* patient_cmd = add_analysis("patient", "Demographics and rating series of one patient");
  std::string patient_id;
  patient_cmd->add_option("--id", patient_id, "Patient id")->required();

  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP API");
  ServerConfig config;
  std::string listen;
  std::string cors;
  serve_cmd->add_option("--listen", listen, "host:port (default 127.0.0.1:8080)");
  serve_cmd->add_option("--data", config.data_dir, "Dataset store directory");
  serve_cmd->add_option("--cache-entries", config.cache_entries, "Result cache capacity");
  serve_cmd->add_option("--max-upload", config.max_upload_bytes, "Upload size cap in bytes");
  serve_cmd->add_option("--cors", cors, "Comma-separated allowed origins");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (synth_cmd->parsed()) {
      synth::write_cohort(synth::generate(synth_opts), synth_out);
      std::cerr << "wrote " << synth_opts.patients << " patients to " << synth_out << "\n";
    } else if (ingest_cmd->parsed()) {
      DatasetStore store(store_dir);
      const auto result = store.ingest(name, read_file(fs::path(data_dir) / "patients.csv"),
                                       read_file(fs::path(data_dir) / "ratings.csv"));
      std::cout << to_text(result.handle.to_json()) << "\n";
    } else if (rules_cmd->parsed()) {
      const auto body = rules_body(*load_dir(data_dir), rules_q.build(rules_cmd));
      emit(format == "csv" ? rules_csv(body) : body, out);
    } else if (cluster_cmd->parsed()) {
      emit(clusters_body(*load_dir(data_dir), cluster_q.build(cluster_cmd)), out);
    } else if (filaments_cmd->parsed()) {
      emit(filaments_body(*load_dir(data_dir), filaments_q.build(filaments_cmd)), out);
    } else if (heatmap_cmd->parsed()) {
      emit(heatmap_body(*load_dir(data_dir), heatmap_q.build(heatmap_cmd)), out);
    } else if (corr_cmd->parsed()) {
      emit(correlations_body(*load_dir(data_dir), corr_q.build(corr_cmd)), out);
    } else if (prev_cmd->parsed()) {
      emit(prevalence_body(*load_dir(data_dir), prev_q.build(prev_cmd)), out);
    } else if (patient_cmd->parsed()) {
      emit(patient_body(*load_dir(data_dir), patient_id), out);
    } else if (serve_cmd->parsed()) {
      config.apply_env();
      if (!listen.empty()) config.set_listen(listen);
      if (!cors.empty()) {
        std::stringstream ss(cors);
        std::string item;
        config.cors_origins.clear();
        while (std::getline(ss, item, ',')) {
          if (!item.empty()) config.cors_origins.push_back(item);
        }
      }
      if (!run_server(config)) {
        std::cerr << "error: cannot listen on " << config.host << ":" << config.port << "\n";
        return kExitIo;
      }
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    const auto& v = e.violations();
    for (std::size_t i = 0; i < v.size() && i < 20; ++i) {
      std::cerr << "  " << v[i].file << ":" << v[i].row << ":" << v[i].column << " "
                << to_string(v[i].code) << ": " << v[i].message << "\n";
    }
    return kExitValidation;
  } catch (const Error& e) {
    std::cerr << "error: " << to_string(e.code()) << ": " << e.what() << "\n";
    return e.code() == ErrorCode::Io ? kExitIo : kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitOk;
}
