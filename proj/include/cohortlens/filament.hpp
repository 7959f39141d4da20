#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "cohortlens/model.hpp"

namespace cohortlens::filament {

inline constexpr double kPi = 3.14159265358979323846;

struct AngleParams {
  double theta_max = 3.0 * kPi / 4.0;
  double delta_r_max = 10.0;
};

struct LengthParams {
  /// Layout length of a one-week step.
  double base_length = 1.0;
  /// Vertical root offset per mean baseline rating point (therapy means).
  double spread_scale = 0.8;
};

/// theta = theta_max * delta_r / (2 * delta_r_max). Positive is upward.
/// Throws Error(DeltaOutOfRange) when |delta_r| > delta_r_max.
double segment_angle(double delta_r, const AngleParams& params = {});

/// base_length * log2(1 + elapsed_days / 7).
double length_for_days(double elapsed_days, const LengthParams& params = {});

/// Throws Error(NonAdjacentTimepoints) unless to.index == from.index + 1.
double segment_length(const TimePoint& from, const TimePoint& to,
                      const LengthParams& params = {});

struct Vertex {
  double x = 0.0;
  double y = 0.0;
  std::size_t timepoint = 0;
  bool reported = false;
};

struct FilamentPolyline {
  std::string owner;
  std::size_t symptom = 0;
  std::vector<Vertex> vertices;
  bool highlight = false;
};

/// Rotates the horizontal step P1 -> (x+l, y) about P1 by theta for every
/// step up to the last reported timepoint. Unreported steps are flat and
/// marked unreported. Requires an imputed series.
FilamentPolyline build_filament(const RatingSeries& series, const LengthParams& length = {},
                                const AngleParams& angle = {});

/// Real-valued variant used for mean trajectories. `values[t]` is nullopt
/// where no data exists; such steps are flat and unreported. The polyline
/// ends at the last timepoint holding a value.
std::vector<Vertex> build_vertices(const std::vector<std::optional<double>>& values,
                                   double root_y, const LengthParams& length = {},
                                   const AngleParams& angle = {});

struct TherapyMean {
  Therapy therapy;
  std::vector<std::optional<double>> means;  // per timepoint
  std::size_t patients = 0;
};

/// Mean rating per timepoint for each therapy present, over the therapy's
/// patients eligible for that timepoint's phase (imputed data).
std::vector<TherapyMean> therapy_means(const CohortDataset& dataset, std::size_t symptom);

/// One filament per therapy present, root at y = spread_scale * baseline mean.
std::vector<FilamentPolyline> therapy_mean_filaments(const CohortDataset& dataset,
                                                     std::size_t symptom,
                                                     const LengthParams& length = {},
                                                     const AngleParams& angle = {});

/// Individual filaments for the given dataset rows (all rows when empty),
/// sharing a root at the origin.
std::vector<FilamentPolyline> patient_filaments(const CohortDataset& dataset,
                                                std::size_t symptom,
                                                const std::vector<std::size_t>& rows = {},
                                                const LengthParams& length = {},
                                                const AngleParams& angle = {});

}  // namespace cohortlens::filament
