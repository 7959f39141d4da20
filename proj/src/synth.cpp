#include "cohortlens/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "cohortlens/error.hpp"
#include "cohortlens/model.hpp"

namespace cohortlens::synth {

namespace {

// xoshiro256** seeded through splitmix64; explicit so output does not depend
// on the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    for (auto& s : state_) {
      seed += 0x9E3779B97F4A7C15ull;
      std::uint64_t z = seed;
      z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
      z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
      s = z ^ (z >> 31);
    }
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  bool chance(double p) { return uniform() < p; }
  int between(int lo, int hi) { return lo + static_cast<int>(uniform() * (hi - lo + 1)); }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * 3.14159265358979323846 * u2);
    has_spare_ = true;
    return r * std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  template <std::size_t N>
  std::size_t weighted(const std::array<double, N>& weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    double x = uniform() * total;
    for (std::size_t i = 0; i < N; ++i) {
      if (x < weights[i]) return i;
      x -= weights[i];
    }
    return N - 1;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  std::array<std::uint64_t, 4> state_{};
  double spare_ = 0.0;
  bool has_spare_ = false;
};

struct SymptomProfile {
  double baseline;
  double rise;  // peak increase at the end of treatment
};

SymptomProfile profile_for(std::size_t s) {
  const auto category = symptoms()[s].category;
  // Golden-ratio sequence spreads magnitudes without using the RNG, so the
  // profile table is identical for every seed.
  const double spread = std::fmod(static_cast<double>(s) * 0.6180339887498949, 1.0);
  const auto id = symptoms()[s].id;
  if (id == "numbness" || id == "memory" || id == "breath" || id == "nausea" || id == "vomit") {
    return {0.6, 0.4 + 0.4 * spread};  // steady symptoms
  }
  switch (category) {
    case SymptomCategory::Core: return {1.0, 1.5 + 1.5 * spread};
    case SymptomCategory::HncSpecific: return {0.5, 3.0 + 2.0 * spread};
    case SymptomCategory::Interference: return {1.0, 2.0 + 1.5 * spread};
  }
  return {1.0, 1.0};
}

// Relative treatment effect at each timepoint: ramps through the acute weeks,
// decays after treatment.
constexpr std::array<double, kTimepointCount> kShape = {
    0.0, 1.0 / 7, 2.0 / 7, 3.0 / 7, 4.0 / 7, 5.0 / 7, 6.0 / 7, 1.0, 0.5, 0.3, 0.2, 0.15};

double therapy_factor(Therapy t) {
  switch (t) {
    case Therapy::Radiation: return 0.75;
    case Therapy::CcRadiation: return 1.0;
    case Therapy::IcRadiation: return 1.05;
    case Therapy::IcRadiationCc: return 1.25;
  }
  return 1.0;
}

std::string patient_id(std::size_t i, std::size_t width) {
  std::string digits = std::to_string(i + 1);
  if (digits.size() < width) digits.insert(0, width - digits.size(), '0');
  return "p" + digits;
}

}  // namespace

SynthCohort generate(const SynthOptions& options) {
  if (options.patients < 2) {
    throw Error(ErrorCode::InvalidArgument, "synthetic cohort needs at least 2 patients");
  }
  Rng rng(options.seed);
  const std::size_t width = std::max<std::size_t>(3, std::to_string(options.patients).size());
  const auto& grid = time_grid();
  const auto& syms = symptoms();

  SynthCohort out;
  out.patients_csv = "patient_id,age,gender,t_category,therapy,total_dose\n";
  out.ratings_csv = "patient_id,timepoint,symptom,rating\n";
  out.truth_csv = "patient_id,group\n";

  for (std::size_t i = 0; i < options.patients; ++i) {
    const std::string id = patient_id(i, width);
    const int age = rng.between(35, 85);
    const bool male = rng.chance(0.78);
    const auto t_cat = rng.weighted(std::array<double, 5>{0.05, 0.25, 0.3, 0.25, 0.15});
    const auto therapy = kTherapies[rng.weighted(std::array<double, 4>{0.25, 0.3, 0.15, 0.3})];
    const double dose = 60.0 + 0.1 * rng.between(0, 120);
    const bool high = rng.chance(options.high_burden_share);
    const double intercept = 0.7 * rng.normal();

    char dose_text[32];
    std::snprintf(dose_text, sizeof dose_text, "%.1f", dose);
    out.patients_csv += id + "," + std::to_string(age) + "," + (male ? "M" : "F") + ",T" +
                        std::to_string(t_cat) + "," + std::string(to_string(therapy)) + "," +
                        dose_text + "\n";
    out.truth_csv += id + "," + (high ? "high" : "low") + "\n";

    // Follow-up pattern: dropout point plus sporadic missed questionnaires.
    std::size_t last = kTimepointCount - 1;
    if (!rng.chance(0.35)) last = static_cast<std::size_t>(rng.between(4, 10));
    std::array<bool, kTimepointCount> present{};
    for (std::size_t t = 0; t <= last; ++t) {
      const double p = t == 0 ? 0.92 : (t <= 7 ? 0.85 : 0.75);
      present[t] = t == last || rng.chance(p);
    }
    if (std::count(present.begin(), present.end(), true) < 2) {
      present[0] = true;
      present[1] = true;
    }

    const double factor = therapy_factor(therapy);
    for (std::size_t t = 0; t < kTimepointCount; ++t) {
      if (!present[t]) continue;
      const bool partial = rng.chance(0.02);
      const std::size_t blank = partial ? static_cast<std::size_t>(rng.between(0, kSymptomCount - 1))
                                        : kSymptomCount;
      double shape = kShape[t];
      if (therapy == Therapy::IcRadiation && t >= 8) shape *= 1.4;
      for (std::size_t s = 0; s < kSymptomCount; ++s) {
        const auto prof = profile_for(s);
        const double mean = prof.baseline + prof.rise * shape * factor +
                            (high ? options.burden_gap : 0.0) + intercept;
        double value = mean + options.noise_sd * rng.normal();
        if (mean < 1.5 && rng.chance(0.5)) value = 0.0;
        const int rating = static_cast<int>(std::clamp(std::lround(value), 0L, 10L));
        out.ratings_csv += id;
        out.ratings_csv += ',';
        out.ratings_csv += grid[t].label;
        out.ratings_csv += ',';
        out.ratings_csv += syms[s].id;
        out.ratings_csv += ',';
        if (s != blank) out.ratings_csv += std::to_string(rating);
        out.ratings_csv += '\n';
      }
    }
  }
  return out;
}

void write_cohort(const SynthCohort& cohort, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create " + dir + ": " + ec.message());
  auto write = [&](const char* name, const std::string& text) {
    const auto path = fs::path(dir) / name;
    std::ofstream f(path, std::ios::binary);
    f << text;
    if (!f) throw Error(ErrorCode::Io, "cannot write " + path.string());
  };
  write("patients.csv", cohort.patients_csv);
  write("ratings.csv", cohort.ratings_csv);
  write("truth.csv", cohort.truth_csv);
}

}  // namespace cohortlens::synth
