#include <doctest.h>

#include <map>
#include <set>
#include <sstream>

#include "cohortlens/cluster.hpp"
#include "cohortlens/error.hpp"
#include "cohortlens/synth.hpp"
#include "support.hpp"

using namespace cohortlens;

namespace {

std::map<std::string, std::string> truth_of(const synth::SynthCohort& c) {
  std::map<std::string, std::string> out;
  std::istringstream in(c.truth_csv);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    const auto comma = line.find(',');
    out[line.substr(0, comma)] = line.substr(comma + 1);
  }
  return out;
}

}  // namespace

TEST_CASE("synthetic cohort is deterministic per options") {
  const auto a = synth::generate({.patients = 50, .seed = 7});
  const auto b = synth::generate({.patients = 50, .seed = 7});
  const auto c = synth::generate({.patients = 50, .seed = 8});
  CHECK(a.patients_csv == b.patients_csv);
  CHECK(a.ratings_csv == b.ratings_csv);
  CHECK(a.truth_csv == b.truth_csv);
  CHECK(a.ratings_csv != c.ratings_csv);
  CHECK_THROWS_AS(synth::generate({.patients = 1}), Error);
  CHECK_NOTHROW(synth::generate({.patients = 2}));
}

TEST_CASE("default cohort parses and has the expected structure") {
  const auto c = synth::generate({});
  const auto d = parse_dataset(c.patients_csv, c.ratings_csv);
  REQUIRE(d.size() == 699);
  CHECK(d.find_patient("p340").has_value());
  std::set<Therapy> therapies;
  std::size_t dropped = 0;
  std::size_t late = 0;
  for (std::size_t p = 0; p < d.size(); ++p) {
    therapies.insert(d.patients()[p].therapy);
    bool reported_last = false;
    for (std::size_t s = 0; s < kSymptomCount; ++s) reported_last |= d.series(p, s).reported[kTimepointCount - 1];
    if (!reported_last) ++dropped;
  }
  late = eligible_patients(impute(d), Phase::Late).size();
  CHECK(therapies.size() == 4);
  CHECK(dropped > 300);
  CHECK(late > 0);
  CHECK(late < d.size());
  CHECK(truth_of(c).size() == 699);
}

TEST_CASE("planted burden groups are recovered by Ward clustering") {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto c = synth::generate({.patients = 200, .seed = seed, .burden_gap = 4.0, .noise_sd = 1.0});
    const auto truth = truth_of(c);
    const auto d = impute(parse_dataset(c.patients_csv, c.ratings_csv));
    std::vector<std::size_t> all(kSymptomCount);
    for (std::size_t s = 0; s < kSymptomCount; ++s) all[s] = s;
    const auto view = cluster::recluster(d, 0, all, 2);
    std::size_t agree = 0;
    for (const auto& pt : view.points) {
      const bool high = truth.at(pt.patient_id) == "high";
      agree += (pt.cluster == 0) == high;
    }
    CHECK(static_cast<double>(agree) / view.points.size() >= 0.95);
  }
}
