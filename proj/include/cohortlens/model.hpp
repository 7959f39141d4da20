#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cohortlens {

// ---------------------------------------------------------------------------
// Symptom manifest

enum class SymptomCategory { Core, HncSpecific, Interference };

std::string_view to_string(SymptomCategory category);

struct Symptom {
  std::string_view id;
  SymptomCategory category;
};

inline constexpr std::size_t kSymptomCount = 28;

/// Versioned canonical symptom list. Order is the manifest order (category
/// order Core, HncSpecific, Interference) and is the column order used
/// everywhere a full symptom vector appears.
inline constexpr std::string_view kManifestVersion = "mdasi-hn/1";
const std::array<Symptom, kSymptomCount>& symptoms();

/// Manifest index, or nullopt for an unknown id.
std::optional<std::size_t> symptom_index(std::string_view id);

// ---------------------------------------------------------------------------
// Time grid

enum class Phase { Baseline, Acute, Late };

std::string_view to_string(Phase phase);
std::optional<Phase> parse_phase(std::string_view text);

inline constexpr std::size_t kTimepointCount = 12;

struct TimePoint {
  std::size_t index;
  std::string_view label;
  Phase phase;
  int day_offset;
};

const std::array<TimePoint, kTimepointCount>& time_grid();

/// Accepts either a canonical label (`wk0`..`post18m`) or a bare index.
std::optional<std::size_t> timepoint_index(std::string_view text);

Phase phase_of(const TimePoint& tp);
Phase phase_of(std::size_t timepoint_index);

/// Timepoint indices belonging to a phase, in grid order.
std::span<const std::size_t> phase_indices(Phase phase);

// ---------------------------------------------------------------------------
// Patients and ratings

enum class Gender { M, F };
enum class TCategory { T0, T1, T2, T3, T4 };
enum class Therapy { Radiation, CcRadiation, IcRadiation, IcRadiationCc };

inline constexpr std::array<Therapy, 4> kTherapies = {
    Therapy::Radiation, Therapy::CcRadiation, Therapy::IcRadiation, Therapy::IcRadiationCc};

std::string_view to_string(Gender g);
std::string_view to_string(TCategory t);
std::string_view to_string(Therapy t);
std::optional<Gender> parse_gender(std::string_view text);
std::optional<TCategory> parse_t_category(std::string_view text);
std::optional<Therapy> parse_therapy(std::string_view text);

struct PatientRecord {
  std::string patient_id;
  int age = 0;
  Gender gender = Gender::M;
  TCategory t_category = TCategory::T0;
  Therapy therapy = Therapy::Radiation;
  std::optional<double> total_dose;

  bool operator==(const PatientRecord&) const = default;
};

using Rating = std::optional<std::uint8_t>;

/// Twelve slots for one (patient, symptom). `reported` records which slots
/// held a questionnaire value before imputation and never changes afterwards.
struct RatingSeries {
  std::array<Rating, kTimepointCount> values{};
  std::array<bool, kTimepointCount> reported{};

  bool complete() const;
  /// Greatest reported index, if any.
  std::optional<std::size_t> last_reported() const;

  bool operator==(const RatingSeries&) const = default;
};

/// Immutable cohort snapshot. Patients are sorted by id; `series` is indexed
/// [patient][symptom] in manifest order.
class CohortDataset {
 public:
  CohortDataset() = default;
  CohortDataset(std::vector<PatientRecord> patients,
                std::vector<std::array<RatingSeries, kSymptomCount>> series, bool imputed,
                std::size_t partial_questionnaires = 0);

  const std::vector<PatientRecord>& patients() const { return patients_; }
  std::size_t size() const { return patients_.size(); }
  bool empty() const { return patients_.empty(); }
  bool imputed() const { return imputed_; }

  const RatingSeries& series(std::size_t patient, std::size_t symptom) const {
    return series_[patient][symptom];
  }
  const std::array<RatingSeries, kSymptomCount>& series_of(std::size_t patient) const {
    return series_[patient];
  }

  std::optional<std::size_t> find_patient(std::string_view patient_id) const;

  /// True when the patient reported any symptom at the timepoint.
  bool questionnaire_reported(std::size_t patient, std::size_t tp) const;
  std::size_t questionnaire_count(std::size_t patient) const;

  /// Questionnaires that had some but not all 28 symptoms at ingestion.
  std::size_t partial_questionnaires() const { return partial_questionnaires_; }

  bool operator==(const CohortDataset& other) const;

 private:
  std::vector<PatientRecord> patients_;
  std::vector<std::array<RatingSeries, kSymptomCount>> series_;
  bool imputed_ = false;
  std::size_t partial_questionnaires_ = 0;
};

// ---------------------------------------------------------------------------
// Operations

/// Parses the patients and long-format ratings CSVs. All input problems are
/// collected and thrown together as a ValidationError. Patients with fewer
/// than two reported questionnaires are dropped.
CohortDataset parse_dataset(std::string_view patients_csv, std::string_view ratings_csv);

/// Canonical CSV text: fixed headers, patients sorted by id, ratings rows in
/// (patient, timepoint, manifest) order, reported cells only.
struct CanonicalCsv {
  std::string patients;
  std::string ratings;
};
CanonicalCsv serialize_dataset(const CohortDataset& dataset);

/// Carry-forward imputation. Missing slots take the nearest earlier value;
/// a missing baseline becomes 0.
CohortDataset impute(const CohortDataset& dataset);
RatingSeries impute_series(const RatingSeries& series);

/// Patients (as dataset row indices, ascending) with at least one reported
/// questionnaire inside the phase.
std::vector<std::size_t> eligible_patients(const CohortDataset& dataset, Phase phase);

}  // namespace cohortlens
