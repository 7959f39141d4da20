#include <doctest.h>

#include <sstream>

#include "cohortlens/analytics.hpp"
#include "support.hpp"

using namespace cohortlens;

namespace {

std::string quiet(const std::string& args) { return support::cli() + " " + args + " 2>/dev/null"; }

std::string chomp(std::string s) {
  if (!s.empty() && s.back() == '\n') s.pop_back();
  return s;
}

std::string ids_of(std::uint32_t mask) {
  std::string s;
  for (auto b : support::bits_of(mask)) {
    if (!s.empty()) s += ';';
    s += symptoms()[b].id;
  }
  return s;
}

}  // namespace

TEST_CASE("synth writes byte-identical cohorts for the same seed") {
  support::TempDir dir;
  const auto a = (dir.path() / "a").string();
  const auto b = (dir.path() / "b").string();
  REQUIRE(support::run(quiet("synth --patients 40 --seed 5 --out " + a)).exit_code == 0);
  REQUIRE(support::run(quiet("synth --patients 40 --seed 5 --out " + b)).exit_code == 0);
  for (const char* f : {"patients.csv", "ratings.csv", "truth.csv"}) {
    CHECK(support::read_file(dir.path() / "a" / f) == support::read_file(dir.path() / "b" / f));
  }
  CHECK(support::run(quiet("synth --patients 2 --out " + a)).exit_code == 0);
  CHECK(support::run(quiet("synth --patients 1 --out " + a)).exit_code == 2);
}

TEST_CASE("rules CSV on the three-visit fixture equals the brute-force oracle") {
  const auto fixture = support::fixture("three_visits").string();
  const auto r = support::run(quiet("rules --data " + fixture +
                                    " --phase acute --min-support 0.3 --min-lift 0.01 --top-k 100 --format csv"));
  REQUIRE(r.exit_code == 0);

  const auto f = *symptom_index("fatigue");
  const auto d = *symptom_index("drowsiness");
  const auto p = *symptom_index("pain");
  const auto s = *symptom_index("swallow");
  const std::vector<std::uint32_t> tx = {(1u << f) | (1u << d), (1u << p) | (1u << d),
                                         (1u << f) | (1u << p) | (1u << s)};
  std::string expected = "id,antecedent,consequent,support,lift";
  std::size_t id = 1;
  for (const auto& rule : support::brute_rules(tx, 0.3, 0.01, 100)) {
    const double support = static_cast<double>(rule.count) / 3.0;
    const double lift = static_cast<double>(rule.lift_num) / static_cast<double>(rule.lift_den);
    expected += "\n" + std::to_string(id++) + "," + ids_of(rule.antecedent) + "," + ids_of(rule.consequent) + "," +
                to_text(Json(round6(support))) + "," + to_text(Json(round6(lift)));
  }
  CHECK(chomp(r.output) == expected);
  CHECK(id == 17);
}

TEST_CASE("CLI JSON output is byte-identical to the API body") {
  support::TempDir dir;
  const auto cohort = (dir.path() / "c").string();
  REQUIRE(support::run(quiet("synth --patients 80 --seed 11 --out " + cohort)).exit_code == 0);
  const auto data = LoadedDataset::from_csv(support::read_file(dir.path() / "c" / "patients.csv"),
                                            support::read_file(dir.path() / "c" / "ratings.csv"));

  CHECK(chomp(support::run(quiet("cluster --data " + cohort + " --timepoint wk4")).output) ==
        clusters_body(*data, {{"timepoint", "wk4"}}));
  CHECK(chomp(support::run(quiet("rules --data " + cohort + " --phase late --min-support 0.2")).output) ==
        rules_body(*data, {{"phase", "late"}, {"min_support", "0.2"}}));
  CHECK(chomp(support::run(quiet("filaments --data " + cohort + " --symptom taste --mode therapy_mean")).output) ==
        filaments_body(*data, {{"symptom", "taste"}, {"mode", "therapy_mean"}}));
  CHECK(chomp(support::run(quiet("correlations --data " + cohort + " --timepoint wk2")).output) ==
        correlations_body(*data, {{"timepoint", "wk2"}}));
  CHECK(chomp(support::run(quiet("patient --data " + cohort + " --id p003")).output) == patient_body(*data, "p003"));

  const auto heat = Json::parse(support::run(quiet("heatmap --data " + cohort)).output);
  std::size_t cells = 0;
  for (const auto& g : heat["groups"]) {
    for (const auto& row : g["rows"]) cells += row["cells"].size();
  }
  CHECK(cells == 336);

  const auto out = (dir.path() / "rules.json").string();
  REQUIRE(support::run(quiet("rules --data " + cohort + " -o " + out)).exit_code == 0);
  CHECK(chomp(support::read_file(out)) == rules_body(*data, {}));
}

TEST_CASE("CLI exit codes") {
  support::TempDir dir;
  const auto fixture = support::fixture("three_visits").string();
  CHECK(support::run(quiet("rules --data " + fixture + " --top-k 0")).exit_code == 2);
  CHECK(support::run(quiet("rules --data " + fixture + " --phase nope")).exit_code == 2);
  CHECK(support::run(quiet("cluster --data " + fixture + " --timepoint wk9")).exit_code == 2);
  CHECK(support::run(quiet("rules --data " + (dir.path() / "missing").string())).exit_code == 3);
  CHECK(support::run(quiet("patient --data " + fixture + " --id nobody")).exit_code == 2);
  CHECK(support::run(quiet("bogus")).exit_code == 2);

  // Validation failures list violations on stderr.
  const auto bad = dir.path() / "bad";
  std::filesystem::create_directories(bad);
  std::filesystem::copy_file(support::fixture("three_visits/patients.csv"), bad / "patients.csv");
  std::string ratings = support::read_file(support::fixture("three_visits/ratings.csv"));
  ratings += "p001,wk4,fatigue,12\n";
  {
    std::ofstream f(bad / "ratings.csv", std::ios::binary);
    f << ratings;
  }
  const auto r = support::run(support::cli() + " rules --data " + bad.string() + " 2>&1");
  CHECK(r.exit_code == 2);
  CHECK(r.output.find("RatingOutOfRange") != std::string::npos);

  const auto store = (dir.path() / "store").string();
  const auto ing = support::run(quiet("ingest --data " + fixture + " --store " + store + " --name t1"));
  CHECK(ing.exit_code == 0);
  CHECK(Json::parse(ing.output)["name"] == "t1");
}
