#include "cohortlens/filament.hpp"

#include <cmath>

#include "cohortlens/error.hpp"

namespace cohortlens::filament {

double segment_angle(double delta_r, const AngleParams& params) {
  if (!(std::abs(delta_r) <= params.delta_r_max)) {
    throw Error(ErrorCode::DeltaOutOfRange, "rating difference outside [-max, max]");
  }
  return params.theta_max * delta_r / (2.0 * params.delta_r_max);
}

double length_for_days(double elapsed_days, const LengthParams& params) {
  return params.base_length * std::log2(1.0 + elapsed_days / 7.0);
}

double segment_length(const TimePoint& from, const TimePoint& to, const LengthParams& params) {
  if (to.index != from.index + 1) {
    throw Error(ErrorCode::NonAdjacentTimepoints, "segments join consecutive timepoints only");
  }
  return length_for_days(static_cast<double>(to.day_offset - from.day_offset), params);
}

namespace {

Vertex step(const Vertex& from, const TimePoint& a, const TimePoint& b, double delta_r,
            bool reported, const LengthParams& length, const AngleParams& angle) {
  const double l = segment_length(a, b, length);
  const double theta = segment_angle(delta_r, angle);
  return {from.x + l * std::cos(theta), from.y + l * std::sin(theta), b.index, reported};
}

}  // namespace

FilamentPolyline build_filament(const RatingSeries& series, const LengthParams& length,
                                const AngleParams& angle) {
  if (!series.complete()) {
    throw Error(ErrorCode::UnimputedSeries, "filaments need an imputed series");
  }
  FilamentPolyline out;
  const auto& grid = time_grid();
  const auto last = series.last_reported().value_or(0);
  out.vertices.push_back({0.0, 0.0, 0, series.reported[0]});
  for (std::size_t t = 0; t < last; ++t) {
    const bool reported = series.reported[t + 1];
    // Imputed carry-forward already makes unreported steps a zero change.
    const double delta =
        reported ? static_cast<double>(*series.values[t + 1]) - static_cast<double>(*series.values[t])
                 : 0.0;
    out.vertices.push_back(step(out.vertices.back(), grid[t], grid[t + 1], delta, reported, length, angle));
  }
  return out;
}

std::vector<Vertex> build_vertices(const std::vector<std::optional<double>>& values,
                                   double root_y, const LengthParams& length,
                                   const AngleParams& angle) {
  std::vector<Vertex> out;
  const auto& grid = time_grid();
  std::size_t last = 0;
  for (std::size_t t = 0; t < values.size() && t < kTimepointCount; ++t) {
    if (values[t]) last = t;
  }
  out.push_back({0.0, root_y, 0, values.empty() ? false : values[0].has_value()});
  double previous = (!values.empty() && values[0]) ? *values[0] : 0.0;
  for (std::size_t t = 0; t < last; ++t) {
    const auto& next = values[t + 1];
    const double delta = next ? *next - previous : 0.0;
    if (next) previous = *next;
    out.push_back(step(out.back(), grid[t], grid[t + 1], delta, next.has_value(), length, angle));
  }
  return out;
}

std::vector<TherapyMean> therapy_means(const CohortDataset& dataset, std::size_t symptom) {
  if (symptom >= kSymptomCount) throw Error(ErrorCode::UnknownSymptom, "symptom index out of range");
  if (!dataset.imputed()) throw Error(ErrorCode::UnimputedSeries, "mean filaments need imputed data");

  std::array<std::vector<std::uint8_t>, 3> eligible_by_phase;
  for (auto phase : {Phase::Baseline, Phase::Acute, Phase::Late}) {
    auto& flags = eligible_by_phase[static_cast<std::size_t>(phase)];
    flags.assign(dataset.size(), 0);
    for (auto row : eligible_patients(dataset, phase)) flags[row] = 1;
  }

  std::vector<TherapyMean> out;
  for (auto therapy : kTherapies) {
    std::array<double, kTimepointCount> sum{};
    std::array<std::size_t, kTimepointCount> count{};
    std::size_t patients = 0;
    for (std::size_t p = 0; p < dataset.size(); ++p) {
      if (dataset.patients()[p].therapy != therapy) continue;
      ++patients;
      const auto& series = dataset.series(p, symptom);
      for (std::size_t t = 0; t < kTimepointCount; ++t) {
        if (!eligible_by_phase[static_cast<std::size_t>(phase_of(t))][p]) continue;
        sum[t] += *series.values[t];
        ++count[t];
      }
    }
    if (patients == 0) continue;
    TherapyMean mean{therapy, std::vector<std::optional<double>>(kTimepointCount), patients};
    for (std::size_t t = 0; t < kTimepointCount; ++t) {
      if (count[t]) mean.means[t] = sum[t] / static_cast<double>(count[t]);
    }
    out.push_back(std::move(mean));
  }
  return out;
}

std::vector<FilamentPolyline> therapy_mean_filaments(const CohortDataset& dataset,
                                                     std::size_t symptom,
                                                     const LengthParams& length,
                                                     const AngleParams& angle) {
  std::vector<FilamentPolyline> out;
  for (const auto& mean : therapy_means(dataset, symptom)) {
    const double baseline = mean.means[0].value_or(0.0);
    FilamentPolyline f;
    f.owner = std::string(to_string(mean.therapy));
    f.symptom = symptom;
    f.vertices = build_vertices(mean.means, length.spread_scale * baseline, length, angle);
    out.push_back(std::move(f));
  }
  return out;
}

std::vector<FilamentPolyline> patient_filaments(const CohortDataset& dataset,
                                                std::size_t symptom,
                                                const std::vector<std::size_t>& rows,
                                                const LengthParams& length,
                                                const AngleParams& angle) {
  if (symptom >= kSymptomCount) throw Error(ErrorCode::UnknownSymptom, "symptom index out of range");
  std::vector<std::size_t> selected = rows;
  if (selected.empty()) {
    for (std::size_t p = 0; p < dataset.size(); ++p) selected.push_back(p);
  }
  std::vector<FilamentPolyline> out;
  out.reserve(selected.size());
  for (auto p : selected) {
    auto f = build_filament(dataset.series(p, symptom), length, angle);
    f.owner = dataset.patients()[p].patient_id;
    f.symptom = symptom;
    out.push_back(std::move(f));
  }
  return out;
}

}  // namespace cohortlens::filament
