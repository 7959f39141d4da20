// Acceptance suite: one PASS/FAIL line per primary criterion, nonzero exit on
// any failure.

#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>

#include "cohortlens/analytics.hpp"
#include "cohortlens/arm.hpp"
#include "cohortlens/cluster.hpp"
#include "cohortlens/filament.hpp"
#include "cohortlens/rule_graph.hpp"
#include "cohortlens/server.hpp"
#include "cohortlens/stats.hpp"
#include "cohortlens/synth.hpp"
#include "support.hpp"

using namespace cohortlens;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (ok) return;
    if (pass) detail = what;
    pass = false;
  }
};

struct Criterion {
  std::string name;
  double budget_s;
  std::function<Outcome()> run;
};

std::vector<std::size_t> all_symptoms() {
  std::vector<std::size_t> v(kSymptomCount);
  for (std::size_t s = 0; s < kSymptomCount; ++s) v[s] = s;
  return v;
}

// ---------------------------------------------------------------------------

Outcome three_visits() {
  Outcome o;
  const auto d = support::three_visits_dataset();
  const auto ts = arm::build_transactions(d, Phase::Acute);
  o.require(ts.size() == 3, "expected 3 acute transactions");
  const auto f = *symptom_index("fatigue");
  const auto dr = *symptom_index("drowsiness");
  const auto p = *symptom_index("pain");
  const auto s = *symptom_index("swallow");
  const auto tx = ts.masks();

  const auto fd = arm::mask_of({f, dr});
  o.require(arm::support(fd, ts) == arm::Rational{1, 3}, "support({fatigue,drowsiness}) != 1/3");
  o.require(support::brute_count(fd, tx) == 1, "brute count({fatigue,drowsiness}) != 1");

  auto brute_lift = [&](arm::ItemMask x, arm::ItemMask y) {
    const auto n = static_cast<std::int64_t>(tx.size());
    return arm::Rational{support::brute_count(x | y, tx) * n,
                         static_cast<std::int64_t>(support::brute_count(x, tx)) * support::brute_count(y, tx)};
  };
  const auto l1 = arm::lift(arm::mask_of({f}), arm::mask_of({dr}), ts);
  const auto l2 = arm::lift(arm::mask_of({f, p}), arm::mask_of({s}), ts);
  o.require(l1 == arm::Rational{3, 4}, "lift({fatigue},{drowsiness}) != 3/4");
  o.require(l1 == brute_lift(arm::mask_of({f}), arm::mask_of({dr})), "lift 0.75 disagrees with brute force");
  o.require(l2 == arm::Rational{3, 1}, "lift({fatigue,pain},{swallow}) != 3");
  o.require(l2 == brute_lift(arm::mask_of({f, p}), arm::mask_of({s})), "lift 3 disagrees with brute force");
  o.detail = o.pass ? "support 1/3, lifts 3/4 and 3/1 exact" : o.detail;
  return o;
}

Outcome apriori_oracle() {
  Outcome o;
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> u(0.05, 0.9);
  std::size_t itemsets = 0;
  for (int iter = 0; iter < 200; ++iter) {
    const int items = 1 + static_cast<int>(rng() % 8);
    const auto tx = support::random_transactions(rng, items, 30);
    const double min_support = u(rng);
    const auto ts = arm::from_masks(tx);
    const auto got = arm::apriori_frequent_itemsets(ts, min_support);
    const auto want = support::brute_frequent(tx, min_support);
    std::map<arm::ItemMask, std::uint32_t> a, b;
    for (const auto& x : got) a[x.items] = x.count;
    for (const auto& x : want) b[x.mask] = x.count;
    o.require(got.size() == a.size(), "duplicate itemsets in case " + std::to_string(iter));
    o.require(a == b, "itemsets or counts differ in case " + std::to_string(iter));
    for (const auto& x : got) {
      o.require(x.support() == arm::Rational{x.count, static_cast<std::int64_t>(tx.size())},
                "support is not count/N in case " + std::to_string(iter));
    }
    itemsets += want.size();
  }
  if (o.pass) o.detail = "200 cases, " + std::to_string(itemsets) + " itemsets matched";
  return o;
}

Outcome filament_formula() {
  Outcome o;
  double worst_angle = 0.0;
  for (int dr = -10; dr <= 10; ++dr) {
    worst_angle = std::max(worst_angle, std::abs(filament::segment_angle(dr) - (3.0 * M_PI / 4.0) * dr / 20.0));
  }
  o.require(worst_angle <= 1e-12, "angle error " + std::to_string(worst_angle));

  std::mt19937_64 rng(7);
  const auto& g = time_grid();
  double worst_len = 0.0;
  for (int iter = 0; iter < 500; ++iter) {
    RatingSeries s;
    for (std::size_t t = 0; t < kTimepointCount; ++t) {
      s.values[t] = static_cast<std::uint8_t>(rng() % 11);
      s.reported[t] = true;
    }
    const auto f = filament::build_filament(s);
    for (std::size_t t = 0; t + 1 < f.vertices.size(); ++t) {
      const double seg = std::hypot(f.vertices[t + 1].x - f.vertices[t].x, f.vertices[t + 1].y - f.vertices[t].y);
      const double want = std::log2(1.0 + (g[t + 1].day_offset - g[t].day_offset) / 7.0);
      worst_len = std::max(worst_len, std::abs(seg - want));
    }
  }
  o.require(worst_len <= 1e-9, "length error " + std::to_string(worst_len));

  for (int c = 0; c <= 10; ++c) {
    RatingSeries s;
    for (std::size_t t = 0; t < kTimepointCount; ++t) {
      s.values[t] = static_cast<std::uint8_t>(c);
      s.reported[t] = true;
    }
    for (const auto& v : filament::build_filament(s).vertices) o.require(v.y == 0.0, "constant series leaves y = 0");
  }
  if (o.pass) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "max angle err %.1e, max length err %.1e", worst_angle, worst_len);
    o.detail = buf;
  }
  return o;
}

Outcome imputation_fuzz() {
  Outcome o;
  std::mt19937_64 rng(99);
  for (int iter = 0; iter < 10000; ++iter) {
    RatingSeries s;
    const double density = static_cast<double>(rng() % 100) / 100.0;
    for (std::size_t t = 0; t < kTimepointCount; ++t) {
      if (static_cast<double>(rng() % 1000) / 1000.0 < density) {
        s.values[t] = static_cast<std::uint8_t>(rng() % 11);
        s.reported[t] = true;
      }
    }
    const auto imp = impute_series(s);
    o.require(imp.reported == s.reported, "reported flags changed");
    std::optional<std::uint8_t> carried;
    for (std::size_t t = 0; t < kTimepointCount; ++t) {
      if (s.reported[t]) {
        o.require(imp.values[t] == s.values[t], "reported value altered");
        carried = s.values[t];
      } else if (t == 0) {
        o.require(imp.values[0] == std::uint8_t{0}, "missing baseline is not 0");
        carried = 0;
      } else {
        o.require(imp.values[t] == carried, "slot is not carried forward");
      }
    }
    if (!o.pass) {
      o.detail += " (case " + std::to_string(iter) + ")";
      break;
    }
  }
  if (o.pass) o.detail = "10000 series";
  return o;
}

Outcome clustering_recovery() {
  Outcome o;
  double worst = 1.0;
  const auto syms = all_symptoms();
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto c = synth::generate({.patients = 200, .seed = seed, .burden_gap = 4.0, .noise_sd = 1.0});
    std::map<std::string, bool> high;
    std::istringstream in(c.truth_csv);
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
      const auto comma = line.find(',');
      high[line.substr(0, comma)] = line.substr(comma + 1) == "high";
    }
    const auto d = impute(parse_dataset(c.patients_csv, c.ratings_csv));
    const auto m = cluster::build_matrix(d, 0, syms);
    const auto w = cluster::ward_cluster(m, 2);
    std::size_t agree = 0;
    for (std::size_t r = 0; r < m.rows(); ++r) {
      agree += (w.labels[r] == 0) == high.at(d.patients()[m.patient_rows[r]].patient_id);
    }
    const double acc = static_cast<double>(agree) / static_cast<double>(m.rows());
    worst = std::min(worst, acc);
    o.require(acc >= 0.95, "seed " + std::to_string(seed) + " accuracy " + std::to_string(acc));

    for (std::size_t i = 1; i < w.merges.size(); ++i) {
      const double prev = w.merges[i - 1].cost;
      o.require(w.merges[i].cost >= prev - 1e-9 * std::max(1.0, std::abs(prev)), "merge costs decrease");
    }

    const auto pca = cluster::pca_project(m);
    const auto& a = pca.components[0];
    const auto& b = pca.components[1];
    double aa = 0, bb = 0, ab = 0;
    for (std::size_t j = 0; j < a.size(); ++j) {
      aa += a[j] * a[j];
      bb += b[j] * b[j];
      ab += a[j] * b[j];
    }
    o.require(std::abs(aa - 1) <= 1e-9 && std::abs(bb - 1) <= 1e-9 && std::abs(ab) <= 1e-9, "PCA not orthonormal");
    o.require(pca.variances[0] >= pca.variances[1], "PCA variances not ordered");
  }
  if (o.pass) o.detail = "20 seeds, worst accuracy " + std::to_string(worst);
  return o;
}

Outcome heatmap_spearman() {
  Outcome o;
  o.require(stats::bin_of(0) == stats::RatingBin::Zero, "bin 0");
  for (int r = 1; r <= 5; ++r) o.require(stats::bin_of(r) == stats::RatingBin::OneToFive, "bin 1-5");
  for (int r = 6; r <= 9; ++r) o.require(stats::bin_of(r) == stats::RatingBin::SixToNine, "bin 6-9");
  o.require(stats::bin_of(10) == stats::RatingBin::Ten, "bin 10");

  double worst_sum = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto d = support::random_dataset(seed, {.patients = 60, .questionnaire_prob = 0.6, .blank_prob = 0.1});
    for (const auto& c : stats::heatmap(d)) {
      if (c.reporters == 0) continue;
      double sum = 0.0;
      for (double x : c.bin_fractions) sum += x;
      worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
    }
    for (std::size_t tp : {0u, 5u, 11u}) {
      const auto m = stats::spearman_matrix(d, tp);
      for (std::size_t i = 0; i < kSymptomCount; ++i) {
        const auto& diag = m[i * kSymptomCount + i];
        o.require(!diag.rho || *diag.rho == 1.0, "diagonal is not 1");
        for (std::size_t j = 0; j < kSymptomCount; ++j) {
          const auto& x = m[i * kSymptomCount + j];
          const auto& y = m[j * kSymptomCount + i];
          o.require(x.rho.has_value() == y.rho.has_value() && (!x.rho || *x.rho == *y.rho), "matrix not symmetric");
        }
      }
    }
  }
  o.require(worst_sum <= 1e-9, "bin fractions sum error " + std::to_string(worst_sum));

  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  for (int iter = 0; iter < 200; ++iter) {
    std::vector<double> a(2 + rng() % 50), up, down;
    for (auto& x : a) x = g(rng);
    for (double x : a) {
      up.push_back(std::exp(x));
      down.push_back(-x * x * x);
    }
    const auto r1 = stats::spearman(a, up);
    const auto r2 = stats::spearman(a, down);
    o.require(r1 && std::abs(*r1 - 1.0) <= 1e-12, "monotone rho != 1");
    o.require(r2 && std::abs(*r2 + 1.0) <= 1e-12, "reversed rho != -1");
  }
  if (o.pass) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "max bin-sum err %.1e", worst_sum);
    o.detail = buf;
  }
  return o;
}

// Runs the full endpoint set against a fresh store and returns the ETags.
std::vector<std::string> end_to_end_run(Outcome& o) {
  support::TempDir dir;
  ServerConfig cfg;
  cfg.data_dir = dir.str();
  ApiService api(cfg);
  const auto c = synth::generate({.patients = 699});

  ApiRequest ingest;
  ingest.method = "POST";
  ingest.path = "/api/v1/datasets";
  ingest.files = {{"patients", c.patients_csv}, {"ratings", c.ratings_csv}, {"name", "synthetic"}};
  const auto created = api.handle(ingest);
  o.require(created.status == 201, "ingest status " + std::to_string(created.status));
  if (created.status != 201) return {};
  const std::string base = "/api/v1/datasets/" + Json::parse(created.body)["dataset_id"].get<std::string>();

  std::vector<std::pair<std::string, Query>> requests = {
      {base + "/rules", {{"phase", "acute"}}},
      {base + "/rules", {{"phase", "late"}}},
      {base + "/heatmap", {}},
  };
  for (const auto& tp : time_grid()) requests.push_back({base + "/clusters", {{"timepoint", std::string(tp.label)}}});

  std::vector<std::string> tags;
  for (const auto& [path, query] : requests) {
    ApiRequest r;
    r.method = "GET";
    r.path = path;
    r.params = query;
    const auto resp = api.handle(r);
    o.require(resp.status == 200, path + " status " + std::to_string(resp.status));
    tags.push_back(resp.headers.count("ETag") ? resp.headers.at("ETag") : "");
  }
  return tags;
}

Outcome end_to_end() {
  Outcome o;
  const auto first = end_to_end_run(o);
  const auto second = end_to_end_run(o);
  o.require(!first.empty() && first == second, "ETags differ across runs");
  if (o.pass) o.detail = std::to_string(first.size()) + " responses, ETags equal across two runs";
  return o;
}

std::vector<arm::AssociationRule> random_rules(std::mt19937_64& rng) {
  for (;;) {
    const int items = 4 + static_cast<int>(rng() % 5);
    const auto tx = support::random_transactions(rng, items, 30);
    const auto ts = arm::from_masks(tx);
    auto rules = arm::generate_rules(arm::apriori_frequent_itemsets(ts, 0.2, 4), ts, 1.0, 20);
    if (!rules.empty()) return rules;
  }
}

Outcome layout_checks() {
  Outcome o;
  std::mt19937_64 rng(424242);
  std::size_t central = 0;
  double worst_stress = 0.0;
  std::string misses;
  for (int iter = 0; iter < 20; ++iter) {
    const auto rules = random_rules(rng);
    const auto g = graph::build_graph(rules);
    const auto a = graph::layout(g, static_cast<std::uint64_t>(iter));
    const auto b = graph::layout(graph::build_graph(rules), static_cast<std::uint64_t>(iter));
    o.require(a.positions == b.positions && a.mds_positions == b.mds_positions, "layout not deterministic");
    worst_stress = std::max(worst_stress, a.mds_stress);

    const auto deg = g.degrees();
    const auto hub = static_cast<std::size_t>(std::max_element(deg.begin(), deg.end()) - deg.begin());
    const auto mean = graph::mean_graph_distance(g);
    const double best = *std::min_element(mean.begin(), mean.end());
    if (mean[hub] <= best + 1e-12) {
      ++central;
    } else {
      char buf[128];
      const auto tied = std::count(deg.begin(), deg.end(), deg[hub]);
      std::snprintf(buf, sizeof buf, " graph %d: hub %s (degree %zu, %td tied) mean %.3f vs min %.3f;", iter,
                    g.nodes[hub].id.c_str(), deg[hub], tied, mean[hub], best);
      misses += buf;
    }
  }
  o.require(central == 20, "max-degree node not most central in " + std::to_string(20 - central) + "/20:" + misses);
  char buf[96];
  std::snprintf(buf, sizeof buf, " (hub central %zu/20, max MDS stress %.3f)", central, worst_stress);
  o.detail += buf;
  return o;
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"three-visit-exact", 1.0, three_visits},
      {"apriori-oracle", 30.0, apriori_oracle},
      {"filament-formula", 1.0, filament_formula},
      {"imputation-fuzz", 5.0, imputation_fuzz},
      {"clustering-recovery", 60.0, clustering_recovery},
      {"heatmap-spearman", 5.0, heatmap_spearman},
      {"end-to-end-699", 60.0, end_to_end},
      {"layout-determinism-centrality", 60.0, layout_checks},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs > c.budget_s) {
      o.pass = false;
      o.detail += " over budget";
    }
    failures += o.pass ? 0 : 1;
    std::printf("%s %-30s %7.3fs / %.0fs  %s\n", o.pass ? "PASS" : "FAIL", c.name.c_str(), secs, c.budget_s,
                o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
