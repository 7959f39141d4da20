#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

namespace cohortlens::synth {

/// Knobs for the synthetic cohort. The planted structure is described in
/// docs/synthetic_cohort.md.
struct SynthOptions {
  std::size_t patients = 699;
  std::uint64_t seed = 42;
  /// Probability that a patient belongs to the planted high-burden group.
  double high_burden_share = 0.4;
  /// Rating offset added to every symptom mean for the high-burden group.
  double burden_gap = 3.0;
  /// Standard deviation of per-rating noise.
  double noise_sd = 1.2;
};

struct SynthCohort {
  std::string patients_csv;
  std::string ratings_csv;
  std::string truth_csv;  // patient_id,group with group in {high, low}
};

/// Deterministic per (options); throws Error(InvalidArgument) for < 2 patients.
SynthCohort generate(const SynthOptions& options);

/// Writes patients.csv, ratings.csv and truth.csv into dir (created if needed).
void write_cohort(const SynthCohort& cohort, const std::string& dir);

}  // namespace cohortlens::synth
