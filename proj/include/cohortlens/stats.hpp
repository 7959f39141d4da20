#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "cohortlens/model.hpp"

namespace cohortlens::stats {

enum class RatingBin { Zero, OneToFive, SixToNine, Ten };

RatingBin bin_of(int rating);

struct HeatmapCell {
  std::size_t symptom = 0;
  std::size_t timepoint = 0;
  std::array<double, 4> bin_fractions{};  // indexed by RatingBin
  std::size_t reporters = 0;
  double reporting_fraction = 0.0;
};

/// 28 x 12 cells in (manifest symptom, timepoint) order, computed from
/// reported values only.
std::vector<HeatmapCell> heatmap(const CohortDataset& dataset);

/// Average (fractional) ranks, 1-based; ties share their mean rank.
std::vector<double> average_ranks(std::span<const double> values);

/// Pearson correlation; nullopt when either side has zero variance or the
/// sample has fewer than two points.
std::optional<double> pearson(std::span<const double> a, std::span<const double> b);
std::optional<double> spearman(std::span<const double> a, std::span<const double> b);

struct CorrelationEntry {
  std::size_t a = 0;
  std::size_t b = 0;
  std::optional<double> rho;
  std::size_t n = 0;
};

/// Full 28x28 matrix, row-major, at one timepoint over patients reporting
/// there. Pairs use patients that reported both symptoms. Throws
/// Error(TooFewReporters) below two reporters.
std::vector<CorrelationEntry> spearman_matrix(const CohortDataset& dataset, std::size_t timepoint);

/// Share of reporters at the timepoint whose rating is >= threshold.
/// Throws Error(NoReporters).
double prevalence(const CohortDataset& dataset, std::size_t symptom, std::size_t timepoint,
                  int presence_threshold = 1);

}  // namespace cohortlens::stats
