#pragma once

// Helpers shared by the unit and acceptance tests: fixtures, random cohorts
// and brute-force oracles that do not reuse engine code paths.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cohortlens/arm.hpp"
#include "cohortlens/model.hpp"

namespace support {

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

inline std::filesystem::path fixture(const std::string& rel) {
  return std::filesystem::path(COHORTLENS_FIXTURES) / rel;
}

inline cohortlens::CohortDataset three_visits_dataset() {
  return cohortlens::parse_dataset(read_file(fixture("three_visits/patients.csv")),
                                   read_file(fixture("three_visits/ratings.csv")));
}

/// Unique scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("cohortlens-test-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::string str() const { return path_.string(); }

 private:
  std::filesystem::path path_;
};

struct RunResult {
  int exit_code = -1;
  std::string output;
};

/// Runs a shell command, capturing stdout.
inline RunResult run(const std::string& command) {
  RunResult r;
  FILE* pipe = popen(command.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.output.append(buf, n);
  const int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

inline std::string cli() { return COHORTLENS_CLI; }

// ---------------------------------------------------------------------------
// Random cohorts written as CSV so they go through the real parser.

struct RandomCohortOptions {
  std::size_t patients = 20;
  double questionnaire_prob = 0.7;
  double blank_prob = 0.0;  // blank rating cell inside a reported questionnaire
  int max_rating = 10;
};

struct CohortCsv {
  std::string patients;
  std::string ratings;
};

inline CohortCsv random_cohort_csv(std::uint64_t seed, const RandomCohortOptions& opt = {}) {
  using namespace cohortlens;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> rating(0, opt.max_rating);
  static const char* therapies[] = {"Radiation", "CC_Radiation", "IC_Radiation", "IC_Radiation_CC"};
  CohortCsv out;
  out.patients = "patient_id,age,gender,t_category,therapy,total_dose\n";
  out.ratings = "patient_id,timepoint,symptom,rating\n";
  for (std::size_t p = 0; p < opt.patients; ++p) {
    char id[16];
    std::snprintf(id, sizeof id, "r%03zu", p);
    out.patients += std::string(id) + "," + std::to_string(40 + rng() % 40) + "," +
                    (rng() % 2 ? "M" : "F") + ",T" + std::to_string(rng() % 5) + "," +
                    therapies[rng() % 4] + ",70\n";
    std::vector<std::size_t> tps;
    for (std::size_t t = 0; t < kTimepointCount; ++t) {
      if (u(rng) < opt.questionnaire_prob) tps.push_back(t);
    }
    while (tps.size() < 2) {
      const std::size_t t = rng() % kTimepointCount;
      if (std::find(tps.begin(), tps.end(), t) == tps.end()) tps.push_back(t);
    }
    std::sort(tps.begin(), tps.end());
    for (auto t : tps) {
      for (std::size_t s = 0; s < kSymptomCount; ++s) {
        out.ratings += std::string(id) + "," + std::string(time_grid()[t].label) + "," +
                       std::string(symptoms()[s].id) + ",";
        // Never blank the first symptom, so the questionnaire stays reported.
        if (s == 0 || u(rng) >= opt.blank_prob) out.ratings += std::to_string(rating(rng));
        out.ratings += "\n";
      }
    }
  }
  return out;
}

inline cohortlens::CohortDataset random_dataset(std::uint64_t seed, const RandomCohortOptions& opt = {}) {
  const auto csv = random_cohort_csv(seed, opt);
  return cohortlens::parse_dataset(csv.patients, csv.ratings);
}

// ---------------------------------------------------------------------------
// Brute-force association-rule oracle over explicit item lists.

struct BruteItemset {
  std::uint32_t mask;
  std::uint32_t count;
};

inline std::uint32_t brute_count(std::uint32_t items, const std::vector<std::uint32_t>& tx) {
  std::uint32_t c = 0;
  for (auto t : tx) {
    bool all = true;
    for (int b = 0; b < 32; ++b) {
      if ((items >> b & 1u) && !(t >> b & 1u)) all = false;
    }
    c += all ? 1 : 0;
  }
  return c;
}

/// Every nonempty subset of the items seen, kept when count >= min_support * N
/// (with the same 1e-9 count-scale slack as the threshold contract).
inline std::vector<BruteItemset> brute_frequent(const std::vector<std::uint32_t>& tx, double min_support,
                                                int max_size = 0) {
  std::uint32_t universe = 0;
  for (auto t : tx) universe |= t;
  std::vector<int> bits;
  for (int b = 0; b < 32; ++b) {
    if (universe >> b & 1u) bits.push_back(b);
  }
  std::vector<BruteItemset> out;
  const std::uint64_t combos = 1ull << bits.size();
  for (std::uint64_t c = 1; c < combos; ++c) {
    std::uint32_t mask = 0;
    for (std::size_t i = 0; i < bits.size(); ++i) {
      if (c >> i & 1u) mask |= 1u << bits[i];
    }
    if (max_size > 0 && __builtin_popcount(mask) > max_size) continue;
    const auto count = brute_count(mask, tx);
    if (count > 0 && static_cast<double>(count) + 1e-9 >= min_support * static_cast<double>(tx.size())) {
      out.push_back({mask, count});
    }
  }
  return out;
}

struct BruteRule {
  std::uint32_t antecedent;
  std::uint32_t consequent;
  std::uint32_t count;
  // lift = lift_num / lift_den exactly
  std::uint64_t lift_num;
  std::uint64_t lift_den;
};

inline std::vector<std::size_t> bits_of(std::uint32_t m) {
  std::vector<std::size_t> v;
  for (std::size_t b = 0; b < 32; ++b) {
    if (m >> b & 1u) v.push_back(b);
  }
  return v;
}

/// All bipartitions X -> Y of every frequent itemset, lift >= min_lift, ranked
/// by support desc, lift desc, antecedent bits, consequent bits; top_k kept.
inline std::vector<BruteRule> brute_rules(const std::vector<std::uint32_t>& tx, double min_support,
                                          double min_lift, std::size_t top_k, int max_size = 0) {
  const auto n = static_cast<std::uint64_t>(tx.size());
  std::vector<BruteRule> rules;
  for (const auto& f : brute_frequent(tx, min_support, max_size)) {
    if (__builtin_popcount(f.mask) < 2) continue;
    for (std::uint32_t x = (f.mask - 1) & f.mask; x != 0; x = (x - 1) & f.mask) {
      const std::uint32_t y = f.mask & ~x;
      const std::uint64_t num = static_cast<std::uint64_t>(f.count) * n;
      const std::uint64_t den = static_cast<std::uint64_t>(brute_count(x, tx)) * brute_count(y, tx);
      if (static_cast<double>(num) + 1e-9 * static_cast<double>(den) < min_lift * static_cast<double>(den)) {
        continue;
      }
      rules.push_back({x, y, f.count, num, den});
    }
  }
  std::sort(rules.begin(), rules.end(), [](const BruteRule& a, const BruteRule& b) {
    if (a.count != b.count) return a.count > b.count;
    const auto l = static_cast<unsigned __int128>(a.lift_num) * b.lift_den;
    const auto r = static_cast<unsigned __int128>(b.lift_num) * a.lift_den;
    if (l != r) return l > r;
    if (bits_of(a.antecedent) != bits_of(b.antecedent)) return bits_of(a.antecedent) < bits_of(b.antecedent);
    return bits_of(a.consequent) < bits_of(b.consequent);
  });
  if (rules.size() > top_k) rules.resize(top_k);
  return rules;
}

inline std::vector<std::uint32_t> random_transactions(std::mt19937_64& rng, int items, int max_tx) {
  std::uniform_int_distribution<int> count(1, max_tx);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double density = 0.2 + 0.6 * u(rng);
  std::vector<std::uint32_t> tx(static_cast<std::size_t>(count(rng)));
  for (auto& t : tx) {
    for (int b = 0; b < items; ++b) {
      if (u(rng) < density) t |= 1u << b;
    }
  }
  return tx;
}

}  // namespace support
