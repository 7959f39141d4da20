#include "cohortlens/model.hpp"

#include <algorithm>
#include <charconv>
#include <unordered_map>

#include "cohortlens/csv.hpp"
#include "cohortlens/error.hpp"

namespace cohortlens {

// ---------------------------------------------------------------------------
// Manifest

const std::array<Symptom, kSymptomCount>& symptoms() {
  using C = SymptomCategory;
  static const std::array<Symptom, kSymptomCount> kList = {{
      {"fatigue", C::Core},        {"sleep", C::Core},         {"distress", C::Core},
      {"pain", C::Core},           {"drowsiness", C::Core},    {"sadness", C::Core},
      {"memory", C::Core},         {"numbness", C::Core},      {"dry_mouth", C::Core},
      {"appetite", C::Core},       {"breath", C::Core},        {"nausea", C::Core},
      {"vomit", C::Core},          {"swallow", C::HncSpecific}, {"speech", C::HncSpecific},
      {"mucus", C::HncSpecific},   {"taste", C::HncSpecific},  {"constipation", C::HncSpecific},
      {"teeth", C::HncSpecific},   {"sores", C::HncSpecific},  {"choking", C::HncSpecific},
      {"skin", C::HncSpecific},    {"work", C::Interference},  {"enjoyment", C::Interference},
      {"activity", C::Interference}, {"mood", C::Interference}, {"walk", C::Interference},
      {"relations", C::Interference},
  }};
  return kList;
}

std::optional<std::size_t> symptom_index(std::string_view id) {
  const auto& list = symptoms();
  for (std::size_t i = 0; i < list.size(); ++i) {
    if (list[i].id == id) return i;
  }
  return std::nullopt;
}

std::string_view to_string(SymptomCategory category) {
  switch (category) {
    case SymptomCategory::Core: return "core";
    case SymptomCategory::HncSpecific: return "hnc_specific";
    case SymptomCategory::Interference: return "interference";
  }
  return "";
}

// ---------------------------------------------------------------------------
// Time grid

const std::array<TimePoint, kTimepointCount>& time_grid() {
  // Treatment ends at week 7 (day 49); late points are 6 weeks and 6, 12,
  // 18 months after that.
  static const std::array<TimePoint, kTimepointCount> kGrid = {{
      {0, "wk0", Phase::Baseline, 0},
      {1, "wk1", Phase::Acute, 7},
      {2, "wk2", Phase::Acute, 14},
      {3, "wk3", Phase::Acute, 21},
      {4, "wk4", Phase::Acute, 28},
      {5, "wk5", Phase::Acute, 35},
      {6, "wk6", Phase::Acute, 42},
      {7, "wk7", Phase::Acute, 49},
      {8, "post6w", Phase::Late, 91},
      {9, "post6m", Phase::Late, 229},
      {10, "post12m", Phase::Late, 414},
      {11, "post18m", Phase::Late, 596},
  }};
  return kGrid;
}

std::optional<std::size_t> timepoint_index(std::string_view text) {
  for (const auto& tp : time_grid()) {
    if (tp.label == text) return tp.index;
  }
  std::size_t value = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec == std::errc{} && ptr == end && !text.empty() && value < kTimepointCount) return value;
  return std::nullopt;
}

Phase phase_of(std::size_t timepoint_index) {
  if (timepoint_index == 0) return Phase::Baseline;
  if (timepoint_index <= 7) return Phase::Acute;
  return Phase::Late;
}

Phase phase_of(const TimePoint& tp) { return phase_of(tp.index); }

std::span<const std::size_t> phase_indices(Phase phase) {
  static const std::array<std::size_t, 1> kBaseline = {0};
  static const std::array<std::size_t, 7> kAcute = {1, 2, 3, 4, 5, 6, 7};
  static const std::array<std::size_t, 4> kLate = {8, 9, 10, 11};
  switch (phase) {
    case Phase::Baseline: return kBaseline;
    case Phase::Acute: return kAcute;
    case Phase::Late: return kLate;
  }
  return {};
}

std::string_view to_string(Phase phase) {
  switch (phase) {
    case Phase::Baseline: return "baseline";
    case Phase::Acute: return "acute";
    case Phase::Late: return "late";
  }
  return "";
}

std::optional<Phase> parse_phase(std::string_view text) {
  if (text == "baseline") return Phase::Baseline;
  if (text == "acute") return Phase::Acute;
  if (text == "late") return Phase::Late;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Enumerations

std::string_view to_string(Gender g) { return g == Gender::M ? "M" : "F"; }

std::string_view to_string(TCategory t) {
  static constexpr std::array<std::string_view, 5> kNames = {"T0", "T1", "T2", "T3", "T4"};
  return kNames[static_cast<std::size_t>(t)];
}

std::string_view to_string(Therapy t) {
  switch (t) {
    case Therapy::Radiation: return "Radiation";
    case Therapy::CcRadiation: return "CC_Radiation";
    case Therapy::IcRadiation: return "IC_Radiation";
    case Therapy::IcRadiationCc: return "IC_Radiation_CC";
  }
  return "";
}

std::optional<Gender> parse_gender(std::string_view text) {
  if (text == "M") return Gender::M;
  if (text == "F") return Gender::F;
  return std::nullopt;
}

std::optional<TCategory> parse_t_category(std::string_view text) {
  for (int i = 0; i < 5; ++i) {
    auto t = static_cast<TCategory>(i);
    if (to_string(t) == text) return t;
  }
  return std::nullopt;
}

std::optional<Therapy> parse_therapy(std::string_view text) {
  for (auto t : kTherapies) {
    if (to_string(t) == text) return t;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Series and dataset

bool RatingSeries::complete() const {
  return std::all_of(values.begin(), values.end(), [](const Rating& r) { return r.has_value(); });
}

std::optional<std::size_t> RatingSeries::last_reported() const {
  for (std::size_t i = kTimepointCount; i-- > 0;) {
    if (reported[i]) return i;
  }
  return std::nullopt;
}

CohortDataset::CohortDataset(std::vector<PatientRecord> patients,
                             std::vector<std::array<RatingSeries, kSymptomCount>> series,
                             bool imputed, std::size_t partial_questionnaires)
    : patients_(std::move(patients)),
      series_(std::move(series)),
      imputed_(imputed),
      partial_questionnaires_(partial_questionnaires) {
  if (patients_.size() != series_.size()) {
    throw Error(ErrorCode::InvalidArgument, "patients and series length differ");
  }
}

std::optional<std::size_t> CohortDataset::find_patient(std::string_view patient_id) const {
  auto it = std::lower_bound(
      patients_.begin(), patients_.end(), patient_id,
      [](const PatientRecord& p, std::string_view id) { return p.patient_id < id; });
  if (it == patients_.end() || it->patient_id != patient_id) return std::nullopt;
  return static_cast<std::size_t>(it - patients_.begin());
}

bool CohortDataset::questionnaire_reported(std::size_t patient, std::size_t tp) const {
  const auto& row = series_[patient];
  return std::any_of(row.begin(), row.end(), [tp](const RatingSeries& s) { return s.reported[tp]; });
}

std::size_t CohortDataset::questionnaire_count(std::size_t patient) const {
  std::size_t n = 0;
  for (std::size_t t = 0; t < kTimepointCount; ++t) n += questionnaire_reported(patient, t);
  return n;
}

bool CohortDataset::operator==(const CohortDataset& other) const {
  return imputed_ == other.imputed_ && patients_ == other.patients_ && series_ == other.series_;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

constexpr std::size_t kMaxViolations = 1000;

class ViolationSink {
 public:
  void add(ErrorCode code, std::string file, std::size_t row, std::string column,
           std::string message) {
    if (items_.size() < kMaxViolations) {
      items_.push_back({code, std::move(file), row, std::move(column), std::move(message)});
    }
  }
  bool empty() const { return items_.empty(); }
  [[noreturn]] void raise() { throw ValidationError(std::move(items_)); }

 private:
  std::vector<Violation> items_;
};

template <typename T>
std::optional<T> parse_number(std::string_view text) {
  T value{};
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end || text.empty()) return std::nullopt;
  return value;
}

bool header_matches(const std::vector<std::string>& fields,
                    std::initializer_list<std::string_view> expected) {
  if (fields.size() != expected.size()) return false;
  std::size_t i = 0;
  for (auto name : expected) {
    if (csv::trim(fields[i++]) != name) return false;
  }
  return true;
}

std::string describe_header(std::initializer_list<std::string_view> names) {
  std::string out;
  for (auto n : names) {
    if (!out.empty()) out += ',';
    out += n;
  }
  return out;
}

}  // namespace

CohortDataset parse_dataset(std::string_view patients_csv, std::string_view ratings_csv) {
  ViolationSink sink;
  const auto patient_rows = csv::read(patients_csv);
  const auto rating_rows = csv::read(ratings_csv);

  // Patients ---------------------------------------------------------------
  std::vector<PatientRecord> patients;
  std::size_t patient_arity = 0;
  if (patient_rows.empty()) {
    sink.add(ErrorCode::MalformedCsv, "patients", 1, "", "missing header");
  } else {
    const auto& header = patient_rows.front().fields;
    if (header_matches(header, {"patient_id", "age", "gender", "t_category", "therapy"})) {
      patient_arity = 5;
    } else if (header_matches(header, {"patient_id", "age", "gender", "t_category", "therapy",
                                       "total_dose"})) {
      patient_arity = 6;
    } else {
      sink.add(ErrorCode::MalformedCsv, "patients", patient_rows.front().line, "",
               "expected header " +
                   describe_header({"patient_id", "age", "gender", "t_category", "therapy"}) +
                   "[,total_dose]");
    }
  }
  std::map<std::string, std::size_t, std::less<>> first_line;
  if (patient_arity != 0) {
    for (std::size_t r = 1; r < patient_rows.size(); ++r) {
      const auto& rec = patient_rows[r];
      if (rec.fields.size() != patient_arity) {
        sink.add(ErrorCode::MalformedCsv, "patients", rec.line, "",
                 "expected " + std::to_string(patient_arity) + " fields, got " +
                     std::to_string(rec.fields.size()));
        continue;
      }
      PatientRecord p;
      bool ok = true;
      p.patient_id = std::string(csv::trim(rec.fields[0]));
      if (p.patient_id.empty()) {
        sink.add(ErrorCode::MalformedCsv, "patients", rec.line, "patient_id", "empty id");
        ok = false;
      }
      if (auto age = parse_number<int>(csv::trim(rec.fields[1])); age && *age >= 0 && *age < 150) {
        p.age = *age;
      } else {
        sink.add(ErrorCode::MalformedCsv, "patients", rec.line, "age", "invalid age");
        ok = false;
      }
      if (auto g = parse_gender(csv::trim(rec.fields[2]))) {
        p.gender = *g;
      } else {
        sink.add(ErrorCode::MalformedCsv, "patients", rec.line, "gender", "expected M or F");
        ok = false;
      }
      if (auto t = parse_t_category(csv::trim(rec.fields[3]))) {
        p.t_category = *t;
      } else {
        sink.add(ErrorCode::MalformedCsv, "patients", rec.line, "t_category",
                 "expected T0..T4");
        ok = false;
      }
      if (auto th = parse_therapy(csv::trim(rec.fields[4]))) {
        p.therapy = *th;
      } else {
        sink.add(ErrorCode::MalformedCsv, "patients", rec.line, "therapy",
                 "unknown therapy '" + rec.fields[4] + "'");
        ok = false;
      }
      if (patient_arity == 6) {
        auto text = csv::trim(rec.fields[5]);
        if (!text.empty()) {
          if (auto dose = parse_number<double>(text); dose && *dose >= 0.0) {
            p.total_dose = *dose;
          } else {
            sink.add(ErrorCode::MalformedCsv, "patients", rec.line, "total_dose",
                     "invalid dose");
            ok = false;
          }
        }
      }
      if (!p.patient_id.empty()) {
        auto [it, inserted] = first_line.emplace(p.patient_id, rec.line);
        if (!inserted) {
          sink.add(ErrorCode::DuplicatePatient, "patients", rec.line, "patient_id",
                   "duplicate patient '" + p.patient_id + "' (first on line " +
                       std::to_string(it->second) + ")");
          ok = false;
        }
      }
      if (ok) patients.push_back(std::move(p));
    }
  }

  std::sort(patients.begin(), patients.end(),
            [](const PatientRecord& a, const PatientRecord& b) { return a.patient_id < b.patient_id; });

  std::unordered_map<std::string, std::size_t> row_of;
  row_of.reserve(patients.size());
  for (std::size_t i = 0; i < patients.size(); ++i) row_of.emplace(patients[i].patient_id, i);

  // Ratings ----------------------------------------------------------------
  std::vector<std::array<RatingSeries, kSymptomCount>> series(patients.size());
  // One bit per (symptom, timepoint) cell seen, to catch duplicates.
  std::vector<std::array<std::array<bool, kTimepointCount>, kSymptomCount>> seen(patients.size());

  if (rating_rows.empty()) {
    sink.add(ErrorCode::MalformedCsv, "ratings", 1, "", "missing header");
  } else if (!header_matches(rating_rows.front().fields,
                             {"patient_id", "timepoint", "symptom", "rating"})) {
    sink.add(ErrorCode::MalformedCsv, "ratings", rating_rows.front().line, "",
             "expected header patient_id,timepoint,symptom,rating");
  } else {
    for (std::size_t r = 1; r < rating_rows.size(); ++r) {
      const auto& rec = rating_rows[r];
      if (rec.fields.size() != 4) {
        sink.add(ErrorCode::MalformedCsv, "ratings", rec.line, "",
                 "expected 4 fields, got " + std::to_string(rec.fields.size()));
        continue;
      }
      const auto pid = csv::trim(rec.fields[0]);
      const auto tp_text = csv::trim(rec.fields[1]);
      const auto symptom_text = csv::trim(rec.fields[2]);
      const auto rating_text = csv::trim(rec.fields[3]);

      bool ok = true;
      auto tp = timepoint_index(tp_text);
      if (!tp) {
        sink.add(ErrorCode::UnknownTimepointLabel, "ratings", rec.line, "timepoint",
                 "unknown timepoint '" + std::string(tp_text) + "'");
        ok = false;
      }
      auto sym = symptom_index(symptom_text);
      if (!sym) {
        sink.add(ErrorCode::UnknownSymptom, "ratings", rec.line, "symptom",
                 "unknown symptom '" + std::string(symptom_text) + "'");
        ok = false;
      }
      Rating rating;
      if (!rating_text.empty()) {
        if (auto v = parse_number<int>(rating_text)) {
          if (*v < 0 || *v > 10) {
            sink.add(ErrorCode::RatingOutOfRange, "ratings", rec.line, "rating",
                     "rating " + std::to_string(*v) + " outside 0..10");
            ok = false;
          } else {
            rating = static_cast<std::uint8_t>(*v);
          }
        } else if (parse_number<double>(rating_text)) {
          sink.add(ErrorCode::RatingOutOfRange, "ratings", rec.line, "rating",
                   "rating must be an integer 0..10");
          ok = false;
        } else {
          sink.add(ErrorCode::MalformedCsv, "ratings", rec.line, "rating",
                   "rating is not a number");
          ok = false;
        }
      }
      auto it = row_of.find(std::string(pid));
      if (it == row_of.end()) {
        sink.add(ErrorCode::UnknownPatient, "ratings", rec.line, "patient_id",
                 "patient '" + std::string(pid) + "' not in patients file");
        ok = false;
      }
      if (!ok) continue;

      auto& cell_seen = seen[it->second][*sym][*tp];
      if (cell_seen) {
        sink.add(ErrorCode::DuplicateCell, "ratings", rec.line, "",
                 "duplicate cell " + std::string(pid) + "/" + std::string(tp_text) + "/" +
                     std::string(symptom_text));
        continue;
      }
      cell_seen = true;
      if (rating) {
        auto& s = series[it->second][*sym];
        s.values[*tp] = rating;
        s.reported[*tp] = true;
      }
    }
  }

  if (!sink.empty()) sink.raise();

  // Eligibility: at least two reported questionnaires.
  std::vector<PatientRecord> kept_patients;
  std::vector<std::array<RatingSeries, kSymptomCount>> kept_series;
  std::size_t partial = 0;
  for (std::size_t i = 0; i < patients.size(); ++i) {
    std::size_t questionnaires = 0;
    std::size_t partial_here = 0;
    for (std::size_t t = 0; t < kTimepointCount; ++t) {
      std::size_t present = 0;
      for (const auto& s : series[i]) present += s.reported[t];
      if (present > 0) ++questionnaires;
      if (present > 0 && present < kSymptomCount) ++partial_here;
    }
    if (questionnaires < 2) continue;
    partial += partial_here;
    kept_patients.push_back(std::move(patients[i]));
    kept_series.push_back(series[i]);
  }
  return CohortDataset(std::move(kept_patients), std::move(kept_series), false, partial);
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace

CanonicalCsv serialize_dataset(const CohortDataset& dataset) {
  CanonicalCsv out;
  out.patients = "patient_id,age,gender,t_category,therapy,total_dose\n";
  out.ratings = "patient_id,timepoint,symptom,rating\n";
  const auto& syms = symptoms();
  const auto& grid = time_grid();
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto& p = dataset.patients()[i];
    out.patients += p.patient_id;
    out.patients += ',';
    out.patients += std::to_string(p.age);
    out.patients += ',';
    out.patients += to_string(p.gender);
    out.patients += ',';
    out.patients += to_string(p.t_category);
    out.patients += ',';
    out.patients += to_string(p.therapy);
    out.patients += ',';
    if (p.total_dose) out.patients += format_double(*p.total_dose);
    out.patients += '\n';
    for (std::size_t t = 0; t < kTimepointCount; ++t) {
      for (std::size_t s = 0; s < kSymptomCount; ++s) {
        const auto& series = dataset.series(i, s);
        if (!series.reported[t]) continue;
        out.ratings += p.patient_id;
        out.ratings += ',';
        out.ratings += grid[t].label;
        out.ratings += ',';
        out.ratings += syms[s].id;
        out.ratings += ',';
        out.ratings += std::to_string(static_cast<int>(*series.values[t]));
        out.ratings += '\n';
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Imputation and eligibility

RatingSeries impute_series(const RatingSeries& series) {
  RatingSeries out = series;
  std::uint8_t carry = 0;
  for (std::size_t t = 0; t < kTimepointCount; ++t) {
    if (out.values[t]) {
      carry = *out.values[t];
    } else {
      out.values[t] = carry;
    }
  }
  return out;
}

CohortDataset impute(const CohortDataset& dataset) {
  if (dataset.imputed()) throw Error(ErrorCode::AlreadyImputed, "dataset is already imputed");
  std::vector<std::array<RatingSeries, kSymptomCount>> series(dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    for (std::size_t s = 0; s < kSymptomCount; ++s) series[i][s] = impute_series(dataset.series(i, s));
  }
  return CohortDataset(dataset.patients(), std::move(series), true,
                       dataset.partial_questionnaires());
}

std::vector<std::size_t> eligible_patients(const CohortDataset& dataset, Phase phase) {
  std::vector<std::size_t> out;
  const auto indices = phase_indices(phase);
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    for (auto t : indices) {
      if (dataset.questionnaire_reported(i, t)) {
        out.push_back(i);
        break;
      }
    }
  }
  return out;
}

}  // namespace cohortlens
